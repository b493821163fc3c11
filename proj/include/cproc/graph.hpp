#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cproc/errors.hpp"

namespace cproc {

// Provenance tags let estimators locate special vertices (roots, tree levels,
// line positions) without re-deriving geometry. `level` is the augmentation
// round that created the vertex; tags are never rewritten once assigned.
enum class TagKind : uint8_t { generic, tree_level, line_position, old_root, new_root };

struct Tag {
    TagKind kind = TagKind::generic;
    int32_t index = 0;  // tree height / line position, when applicable
    int32_t level = 0;
    bool operator==(const Tag&) const = default;
};

std::string tag_to_string(const Tag& t);
Tag tag_from_string(const std::string& s);

// Finite simple undirected graph with an optional root. Edges are kept in
// canonical form (u < v, sorted lexicographically) so that serialization is
// byte-stable. Immutable after construction; safe to share across threads.
class RootedGraph {
public:
    RootedGraph() = default;
    RootedGraph(int vertex_count, std::vector<std::pair<int, int>> edges,
                std::optional<int> root = std::nullopt, std::vector<Tag> tags = {});

    int vertex_count() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::optional<int> root() const { return root_; }
    int root_or_throw() const;
    const std::vector<Tag>& tags() const { return tags_; }
    const Tag& tag(int v) const { return tags_[static_cast<size_t>(v)]; }

    const std::vector<int>& neighbors(int v) const { return adj_[static_cast<size_t>(v)]; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<size_t>(v)].size()); }
    int max_degree() const;
    bool connected() const;
    bool is_tree() const;

    // BFS distance; nullopt when v is unreachable from u.
    std::optional<int> distance(int u, int v) const;
    // Exact on trees (double BFS); used for construction stats.
    int tree_diameter() const;

    int max_tag_level() const;
    std::vector<int> vertices_with_tag(TagKind kind, int index, int level) const;

    uint64_t content_hash() const;

    std::string to_json_string() const;
    static RootedGraph from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static RootedGraph load(const std::string& path);

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::optional<int> root_;
    std::vector<Tag> tags_;
    std::vector<std::vector<int>> adj_;
};

// Parameters of one augmentation step: a d-ary tree truncated at height h is
// hung next to the base root, followed by a line segment. `epsilon` is the
// tolerance in the crossing-length rule (the first line position whose
// crossing probability drops below 1 - epsilon), `ell_max` the truncation
// length of the probe line.
struct AugmentationSpec {
    int d = 2;
    int h = 1;
    double lambda = 1.0;
    double epsilon = 0.1;
    int ell_max = 50;

    // Mean offspring count of the embedded one-generation-per-time-unit
    // branching process: d * (1 - e^-lambda) * e^-2. Above 1 the tree can
    // sustain the infection; below 1 builders only warn.
    double offspring_mean() const;

    // Throws ConfigError on hard violations; returns soft warnings.
    std::vector<std::string> validate() const;
};

inline constexpr long kDefaultGraphSizeCap = 2'000'000;

RootedGraph single_vertex_graph();
RootedGraph build_segment(int ell);
RootedGraph build_truncated_tree(int d, int h, long size_cap = kDefaultGraphSizeCap);

// Base + tree + probe line of ell_max+1 vertices, rooted at the base root.
// Used to measure crossing probabilities along the line.
RootedGraph build_probe_graph(const RootedGraph& base, const AugmentationSpec& spec);

// Same construction with the line cut at `crossing_length`; the far end of
// the line becomes the new root.
RootedGraph build_augmented_graph(const RootedGraph& base, const AugmentationSpec& spec,
                                  int crossing_length);

// Vertex layout of the newest augmentation level, recovered from tags.
struct AugmentLayout {
    int level = 0;
    int base_count = 0;
    int tree_first = 0, tree_count = 0;
    int line_first = 0, line_count = 0;  // line_count includes the new root if present
    int tree_root = -1;
    int line_vertex(int ell) const;
    std::vector<int> tree_level_vertices(const RootedGraph& g, int height) const;
};
AugmentLayout augment_layout(const RootedGraph& g);

}  // namespace cproc
