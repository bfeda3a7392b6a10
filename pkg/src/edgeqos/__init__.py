"""QoS-aware proactive task offloading for edge-computing node ecosystems.

Edge nodes monitor response-time and throughput violation probabilities
through incremental kernel density estimation and, whenever service quality
is jeopardized, pick the tasks worth keeping via an ANN-scored 0-1 knapsack,
offloading the rest to peers selected by load or communication cost.
"""

__version__ = "0.1.0"
