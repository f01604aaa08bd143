"""Neighbor retrieval over ORB features."""

from .features import FeatureSet, extract_features, hamming_matrix, mutual_matches, ratio_matches, similarity
from .store import NeighborRecord, NeighborStore, build_store, load_store, make_record, rank, retrieve, save_store
