#include "longscribe/diarize.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "longscribe/parallel.hpp"

namespace longscribe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

std::vector<Interval> make_windows(double total_duration, double window, double hop) {
    if (!(window > 0.0) || !(hop > 0.0) || hop > window || total_duration < 0.0) {
        throw BadParams("make_windows requires window > 0, 0 < hop <= window, duration >= 0");
    }
    std::vector<Interval> out;
    for (std::size_t i = 0;; ++i) {
        const double start = static_cast<double>(i) * hop;
        if (start >= total_duration) break;
        const double end = start + window;
        if (end <= total_duration) {
            out.push_back({start, end});
        } else {
            // Truncated tail window: kept only when longer than the hop.
            if (total_duration - start > hop) out.push_back({start, total_duration});
            break;
        }
    }
    return out;
}

// --- HDBSCAN -------------------------------------------------------------------

namespace {

struct MstEdge {
    double w;
    std::uint32_t a;
    std::uint32_t b;
};

struct PointDist {
    std::span<const EmbeddingFrame> frames;
    DistanceMetric metric;
    std::vector<double> norms;  // only for cosine

    double operator()(std::size_t i, std::size_t j) const {
        const auto& a = frames[i].vector;
        const auto& b = frames[j].vector;
        if (metric == DistanceMetric::Euclidean) return euclidean(a, b);
        if (norms[i] == 0.0 || norms[j] == 0.0) return 1.0;
        return 1.0 - dot(a, b) / (norms[i] * norms[j]);
    }
};

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

double to_lambda(double distance) { return distance > 0.0 ? 1.0 / distance : kInf; }

// inf - inf reads as zero mass: a cluster born and dying at distance 0.
double lambda_diff(double a, double b) {
    if (std::isinf(a) && std::isinf(b)) return 0.0;
    return a - b;
}

struct Hierarchy {
    // Nodes 0..n-1 are leaves; node n+e merges at sorted-edge index e.
    struct Node {
        int left = -1;
        int right = -1;
        double dist = 0.0;
        std::size_t size = 1;
    };
    std::vector<Node> nodes;
    int root = -1;
};

Hierarchy build_hierarchy(std::span<const EmbeddingFrame> frames, std::size_t min_samples, DistanceMetric metric,
                          int jobs) {
    const std::size_t n = frames.size();
    PointDist dist{frames, metric, {}};
    if (metric == DistanceMetric::Cosine) {
        dist.norms.resize(n);
        for (std::size_t i = 0; i < n; ++i) dist.norms[i] = norm(frames[i].vector);
    }

    // Core distance: distance to the min_samples-th neighbour, capped at the
    // farthest existing neighbour for tiny inputs; 0 for a single point.
    std::vector<double> core(n, 0.0);
    const std::size_t k = std::min(min_samples, n > 0 ? n - 1 : 0);
    if (k > 0) {
        parallel_for(n, jobs, [&](std::size_t i) {
            std::vector<double> row;
            row.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) row.push_back(dist(i, j));
            }
            std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
            core[i] = row[k - 1];
        });
    }

    // Mutual reachability graph, complete; Kruskal realizes the stated edge
    // tie-break (weight, low index, high index) directly.
    std::vector<MstEdge> edges(n * (n - 1) / 2);
    std::vector<std::size_t> row_base(n, 0);
    for (std::size_t i = 1; i < n; ++i) row_base[i] = row_base[i - 1] + (n - i);
    parallel_for(n, jobs, [&](std::size_t i) {
        if (i + 1 >= n) return;
        std::size_t idx = row_base[i];
        for (std::size_t j = i + 1; j < n; ++j, ++idx) {
            const double w = std::max({core[i], core[j], dist(i, j)});
            edges[idx] = MstEdge{w, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
        }
    });
    std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
        return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b);
    });

    Hierarchy h;
    h.nodes.resize(n);
    if (n == 0) return h;
    h.nodes.reserve(2 * n - 1);
    DisjointSet ds(n);
    std::vector<int> comp_root(n);
    std::iota(comp_root.begin(), comp_root.end(), 0);
    for (const MstEdge& e : edges) {
        const int ra = ds.find(e.a);
        const int rb = ds.find(e.b);
        if (ra == rb) continue;
        Hierarchy::Node node;
        node.left = comp_root[ra];
        node.right = comp_root[rb];
        node.dist = e.w;
        node.size = h.nodes[node.left].size + h.nodes[node.right].size;
        h.nodes.push_back(node);
        ds.unite(ra, rb);
        comp_root[ds.find(ra)] = static_cast<int>(h.nodes.size()) - 1;
    }
    h.root = comp_root[ds.find(0)];
    return h;
}

void collect_leaves(const Hierarchy& h, int node, std::vector<int>& out) {
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        if (h.nodes[cur].left < 0) {
            out.push_back(cur);
        } else {
            stack.push_back(h.nodes[cur].left);
            stack.push_back(h.nodes[cur].right);
        }
    }
}

struct Condensed {
    detail::CondensedTree tree;
    std::vector<std::size_t>& node_size() { return tree.node_sizes; }
};

Condensed condense(const Hierarchy& h, std::size_t n, std::size_t min_cluster_size) {
    Condensed out;
    auto& tree = out.tree;
    tree.point_node.assign(n, 0);
    tree.point_lambda.assign(n, kInf);
    if (n == 0) return out;

    tree.nodes.push_back({});  // root, birth lambda 0
    out.node_size().push_back(h.nodes[h.root].size);

    struct Item {
        int hier_node;
        int cnode;
    };
    std::vector<Item> stack{{h.root, 0}};
    std::vector<int> leaves;
    while (!stack.empty()) {
        const auto [hn, cn] = stack.back();
        stack.pop_back();
        const auto& node = h.nodes[hn];
        if (node.left < 0) {
            // Bare leaf as cluster root: the point never leaves.
            tree.point_node[static_cast<std::size_t>(hn)] = cn;
            tree.point_lambda[static_cast<std::size_t>(hn)] = kInf;
            continue;
        }
        const double lam = to_lambda(node.dist);
        const std::size_t ls = h.nodes[node.left].size;
        const std::size_t rs = h.nodes[node.right].size;
        if (ls >= min_cluster_size && rs >= min_cluster_size) {
            // True split: both sides become new condensed clusters.
            for (int child : {node.left, node.right}) {
                const int id = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({cn, lam, 0.0, {}});
                out.node_size().push_back(h.nodes[child].size);
                tree.nodes[cn].children.push_back(id);
                stack.push_back({child, id});
            }
        } else {
            for (int child : {node.left, node.right}) {
                const std::size_t cs = h.nodes[child].size;
                if (cs >= min_cluster_size) {
                    stack.push_back({child, cn});  // cluster continues
                } else {
                    leaves.clear();
                    collect_leaves(h, child, leaves);
                    for (int p : leaves) {
                        tree.point_node[static_cast<std::size_t>(p)] = cn;
                        tree.point_lambda[static_cast<std::size_t>(p)] = lam;
                    }
                }
            }
        }
    }

    // Stability: every departure from a cluster, point fallouts and child
    // splits alike, contributes (lambda at departure - birth lambda).
    for (std::size_t p = 0; p < n; ++p) {
        auto& node = tree.nodes[tree.point_node[p]];
        node.stability += lambda_diff(tree.point_lambda[p], node.birth_lambda);
    }
    for (std::size_t c = 1; c < tree.nodes.size(); ++c) {
        auto& parent = tree.nodes[tree.nodes[c].parent];
        parent.stability +=
            static_cast<double>(out.node_size()[c]) * lambda_diff(tree.nodes[c].birth_lambda, parent.birth_lambda);
    }
    return out;
}

void select_eom(Condensed& cond, std::size_t n, std::size_t min_cluster_size) {
    auto& tree = cond.tree;
    const std::size_t m = tree.nodes.size();
    tree.selected.assign(m, 0);
    if (m == 0) return;
    std::vector<double> score(m, 0.0);
    for (std::size_t ci = m; ci-- > 0;) {
        const auto& node = tree.nodes[ci];
        const bool selectable = cond.node_size()[ci] >= min_cluster_size;
        if (node.children.empty()) {
            score[ci] = node.stability;
            tree.selected[ci] = selectable ? 1 : 0;
            continue;
        }
        double child_sum = 0.0;
        for (int ch : node.children) child_sum += score[ch];
        if (selectable && node.stability > child_sum) {
            score[ci] = node.stability;
            tree.selected[ci] = 1;
        } else {
            score[ci] = child_sum;
        }
    }
    // A selected ancestor absorbs any selection below it.
    std::vector<char> shadowed(m, 0);
    for (std::size_t ci = 0; ci < m; ++ci) {
        const int parent = tree.nodes[ci].parent;
        if (parent >= 0 && (shadowed[parent] || tree.selected[parent])) shadowed[ci] = 1;
        if (shadowed[ci]) tree.selected[ci] = 0;
    }
    (void)n;
}

}  // namespace

namespace detail {

CondensedTree hdbscan_condensed(std::span<const EmbeddingFrame> frames, std::size_t min_cluster_size,
                                std::size_t min_samples, DistanceMetric metric, int jobs) {
    if (frames.empty()) throw BadParams("hdbscan requires at least one frame");
    if (min_cluster_size < 2) throw BadParams("min_cluster_size must be >= 2");
    if (min_samples < 1) throw BadParams("min_samples must be >= 1");
    const std::size_t dim = frames.front().vector.size();
    for (const auto& f : frames) {
        if (f.vector.size() != dim) throw DimensionMismatch("embedding frames disagree on dimension");
    }
    const Hierarchy h = build_hierarchy(frames, min_samples, metric, jobs);
    Condensed cond = condense(h, frames.size(), min_cluster_size);
    select_eom(cond, frames.size(), min_cluster_size);
    return std::move(cond.tree);
}

}  // namespace detail

ClusterResult hdbscan(std::span<const EmbeddingFrame> frames, std::size_t min_cluster_size,
                      std::size_t min_samples, DistanceMetric metric, int jobs) {
    const detail::CondensedTree tree =
        detail::hdbscan_condensed(frames, min_cluster_size, min_samples, metric, jobs);
    const std::size_t n = frames.size();

    // A point belongs to the selected cluster its fallout chain passes
    // through; selections form an antichain so there is at most one.
    std::vector<int> owner(n, -1);
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = tree.point_node[p]; c >= 0; c = tree.nodes[c].parent) {
            if (tree.selected[c]) {
                owner[p] = c;
                break;
            }
        }
    }

    // Number clusters by their smallest member point index.
    std::vector<int> order;
    std::vector<int> label_of(tree.nodes.size(), -1);
    for (std::size_t p = 0; p < n; ++p) {
        if (owner[p] >= 0 && label_of[owner[p]] < 0) {
            label_of[owner[p]] = static_cast<int>(order.size());
            order.push_back(owner[p]);
        }
    }

    ClusterResult out;
    out.k = static_cast<int>(order.size());
    out.labels.assign(n, -1);
    out.centroids.assign(order.size(), std::vector<double>(frames.empty() ? 0 : frames.front().vector.size(), 0.0));
    out.sizes.assign(order.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
        if (owner[p] < 0) continue;
        const int label = label_of[owner[p]];
        out.labels[p] = label;
        out.sizes[label] += 1;
        for (std::size_t d = 0; d < frames[p].vector.size(); ++d) out.centroids[label][d] += frames[p].vector[d];
    }
    for (std::size_t c = 0; c < order.size(); ++c) {
        for (double& v : out.centroids[c]) v /= static_cast<double>(out.sizes[c]);
    }
    return out;
}

ClusterResult merge_clusters(const ClusterResult& c, double threshold) {
    ClusterResult out = c;
    while (out.k > 1) {
        double best_sim = -kInf;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i + 1 < out.centroids.size(); ++i) {
            for (std::size_t j = i + 1; j < out.centroids.size(); ++j) {
                const double sim = cosine_similarity(out.centroids[i], out.centroids[j]);
                if (sim > best_sim) {
                    best_sim = sim;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!(best_sim > threshold)) break;

        const double na = static_cast<double>(out.sizes[bi]);
        const double nb = static_cast<double>(out.sizes[bj]);
        for (std::size_t d = 0; d < out.centroids[bi].size(); ++d) {
            out.centroids[bi][d] = (na * out.centroids[bi][d] + nb * out.centroids[bj][d]) / (na + nb);
        }
        out.sizes[bi] += out.sizes[bj];
        out.centroids.erase(out.centroids.begin() + static_cast<std::ptrdiff_t>(bj));
        out.sizes.erase(out.sizes.begin() + static_cast<std::ptrdiff_t>(bj));
        for (int& label : out.labels) {
            if (label == static_cast<int>(bj)) {
                label = static_cast<int>(bi);
            } else if (label > static_cast<int>(bj)) {
                --label;
            }
        }
        --out.k;
    }
    return out;
}

std::vector<Segment> frames_to_turns(std::span<const EmbeddingFrame> frames, std::span<const int> labels) {
    if (frames.size() != labels.size()) {
        throw LengthMismatch("one label per frame required");
    }
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].start < frames[i - 1].start) throw UnsortedInput("frames are not sorted by start");
    }
    const std::size_t n = frames.size();
    std::vector<Segment> out;
    if (n == 0) return out;

    // Owned spans: overlapping neighbours split at the midpoint of the
    // overlap; a gap between neighbours breaks the run instead of being
    // covered, so the output union stays the union of the frame spans.
    std::vector<double> own_start(n), own_end(n);
    std::vector<char> joined(n, 0);  // joined[i]: frame i continues from i-1
    own_start[0] = frames[0].start;
    own_end[n - 1] = frames[n - 1].end;
    for (std::size_t i = 1; i < n; ++i) {
        if (frames[i].start <= frames[i - 1].end) {
            const double mid = (frames[i - 1].end + frames[i].start) / 2.0;
            own_end[i - 1] = mid;
            own_start[i] = mid;
            joined[i] = 1;
        } else {
            own_end[i - 1] = frames[i - 1].end;
            own_start[i] = frames[i].start;
        }
    }

    for (std::size_t i = 0; i < n;) {
        if (labels[i] < 0) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && labels[j] == labels[i] && joined[j]) ++j;
        Segment s;
        s.speaker_id = "Speaker " + std::to_string(labels[i] + 1);
        s.start = own_start[i];
        s.end = own_end[j - 1];
        out.push_back(std::move(s));
        i = j;
    }
    Transcript t;
    t.segments = std::move(out);
    canonicalize(t);
    return std::move(t.segments);
}

// --- Embedding documents --------------------------------------------------------

EmbeddingSet parse_embeddings(std::string_view document) {
    using json = nlohmann::ordered_json;
    json doc;
    try {
        doc = json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("top level is not an object");
    if (!doc.contains("recording_id") || !doc["recording_id"].is_string()) {
        throw SchemaError("missing string field 'recording_id'");
    }
    if (!doc.contains("dim") || !doc["dim"].is_number_unsigned()) {
        throw SchemaError("missing non-negative integer field 'dim'");
    }
    if (!doc.contains("frames") || !doc["frames"].is_array()) {
        throw SchemaError("missing array field 'frames'");
    }
    EmbeddingSet set;
    set.recording_id = doc["recording_id"].get<std::string>();
    set.dim = doc["dim"].get<std::size_t>();
    std::size_t index = 0;
    for (const json& rec : doc["frames"]) {
        if (!rec.is_object()) throw SchemaError("frame record is not an object", index);
        EmbeddingFrame f;
        for (const char* key : {"start", "end"}) {
            if (!rec.contains(key) || !rec[key].is_number()) {
                throw SchemaError(std::string("missing numeric field '") + key + "'", index);
            }
        }
        f.start = rec["start"].get<double>();
        f.end = rec["end"].get<double>();
        if (!(f.end - f.start > 0.0)) throw InvariantError("frame must have positive length", index);
        if (!rec.contains("vector") || !rec["vector"].is_array()) {
            throw SchemaError("missing array field 'vector'", index);
        }
        for (const json& v : rec["vector"]) {
            if (!v.is_number()) throw SchemaError("vector entry is not a number", index);
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw InvariantError("vector contains a non-finite value", index);
            f.vector.push_back(x);
        }
        if (f.vector.size() != set.dim) {
            throw SchemaError("vector length does not match 'dim'", index);
        }
        set.frames.push_back(std::move(f));
        ++index;
    }
    std::stable_sort(set.frames.begin(), set.frames.end(),
                     [](const EmbeddingFrame& a, const EmbeddingFrame& b) { return a.start < b.start; });
    return set;
}

std::string serialize_embeddings(const EmbeddingSet& e) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["recording_id"] = e.recording_id;
    doc["dim"] = e.dim;
    doc["frames"] = json::array();
    for (const EmbeddingFrame& f : e.frames) {
        json rec;
        rec["start"] = f.start;
        rec["end"] = f.end;
        rec["vector"] = f.vector;
        doc["frames"].push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

}  // namespace longscribe
