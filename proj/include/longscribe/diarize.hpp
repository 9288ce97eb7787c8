#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "longscribe/transcript.hpp"

namespace longscribe {

struct EmbeddingFrame {
    double start = 0.0;  // seconds
    double end = 0.0;    // seconds
    std::vector<double> vector;
};

struct EmbeddingSet {
    std::string recording_id;
    std::size_t dim = 0;
    std::vector<EmbeddingFrame> frames;
};

// Label structure produced by density clustering. labels[i] in
// {-1, 0, .., k-1}, -1 is noise. centroid c is the mean of its members;
// sizes keeps the member counts so merges can reweight exactly.
struct ClusterResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> sizes;
    int k = 0;
};

enum class DistanceMetric { Cosine, Euclidean };

// cos(a, b); 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Overlapping analysis windows: [i*hop, i*hop + window) while the start lies
// before total_duration. A final short window is truncated at total_duration
// and kept only when longer than hop.
std::vector<Interval> make_windows(double total_duration, double window = 1.5, double hop = 0.75);

// Full HDBSCAN pipeline: core distances (distance to the min_samples-th
// neighbour), mutual reachability, minimum spanning tree, single-linkage
// hierarchy, condensation at min_cluster_size, excess-of-mass selection.
// Tie-breaks are fixed: MST edges compare as (weight, low index, high index),
// stability ties prefer the deeper cluster. The root is selectable, so a
// dataset with no internal split yields one cluster rather than all noise.
ClusterResult hdbscan(std::span<const EmbeddingFrame> frames, std::size_t min_cluster_size = 4,
                      std::size_t min_samples = 2, DistanceMetric metric = DistanceMetric::Cosine,
                      int jobs = 0);

// Greedy fixpoint merge: while any centroid pair has cosine similarity
// strictly above threshold, merge the most similar pair (ties: lowest label
// pair) and recompute the centroid as the size-weighted mean, which equals
// the mean over all member vectors. Noise is untouched.
ClusterResult merge_clusters(const ClusterResult& c, double threshold = 0.67);

// Resolves overlapping frame windows to disjoint spans by the midpoint rule
// (frame i owns [mid(end of i-1, start of i), mid(end of i, start of i+1)]),
// then emits one segment per maximal run of one non-noise label, named
// "Speaker <label+1>".
std::vector<Segment> frames_to_turns(std::span<const EmbeddingFrame> frames, std::span<const int> labels);

// Embedding input document (JSON):
//   {"recording_id": str, "dim": int,
//    "frames": [{"start": n, "end": n, "vector": [n, ...]}]}
EmbeddingSet parse_embeddings(std::string_view document);
std::string serialize_embeddings(const EmbeddingSet& e);

namespace detail {

// Condensed cluster tree, exposed so tests can check the excess-of-mass
// selection against exhaustive search over antichains.
struct CondensedTree {
    struct Node {
        int parent = -1;           // -1 for the root
        double birth_lambda = 0.0;
        double stability = 0.0;
        std::vector<int> children;
    };
    std::vector<Node> nodes;
    std::vector<std::size_t> node_sizes;  // points ever belonging to the node
    std::vector<int> point_node;        // condensed node each point fell out of
    std::vector<double> point_lambda;   // lambda at which it fell out
    std::vector<char> selected;         // per node, result of EOM selection
};

CondensedTree hdbscan_condensed(std::span<const EmbeddingFrame> frames, std::size_t min_cluster_size,
                                std::size_t min_samples, DistanceMetric metric, int jobs = 0);

}  // namespace detail

}  // namespace longscribe
