#include "cproc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cproc {

std::string tag_to_string(const Tag& t) {
    std::string s;
    switch (t.kind) {
        case TagKind::generic: s = "generic"; break;
        case TagKind::old_root: s = "old_root"; break;
        case TagKind::new_root: s = "new_root"; break;
        case TagKind::tree_level:
            s = "tree_level(" + std::to_string(t.index) + ")";
            break;
        case TagKind::line_position:
            s = "line_position(" + std::to_string(t.index) + ")";
            break;
    }
    if (t.level != 0) s += "@" + std::to_string(t.level);
    return s;
}

Tag tag_from_string(const std::string& text) {
    Tag t;
    std::string s = text;
    const auto at = s.find('@');
    if (at != std::string::npos) {
        t.level = std::stoi(s.substr(at + 1));
        s = s.substr(0, at);
    }
    auto parse_indexed = [&](const std::string& prefix) -> std::optional<int> {
        if (s.rfind(prefix + "(", 0) != 0 || s.back() != ')') return std::nullopt;
        return std::stoi(s.substr(prefix.size() + 1, s.size() - prefix.size() - 2));
    };
    if (s == "generic") {
        t.kind = TagKind::generic;
    } else if (s == "old_root") {
        t.kind = TagKind::old_root;
    } else if (s == "new_root") {
        t.kind = TagKind::new_root;
    } else if (auto i = parse_indexed("tree_level")) {
        t.kind = TagKind::tree_level;
        t.index = *i;
    } else if (auto i = parse_indexed("line_position")) {
        t.kind = TagKind::line_position;
        t.index = *i;
    } else {
        throw ConfigError("unknown vertex tag: " + text);
    }
    return t;
}

RootedGraph::RootedGraph(int vertex_count, std::vector<std::pair<int, int>> edges,
                         std::optional<int> root, std::vector<Tag> tags)
    : n_(vertex_count), edges_(std::move(edges)), root_(root), tags_(std::move(tags)) {
    if (n_ < 0) throw ConfigError("graph: negative vertex count");
    for (auto& [u, v] : edges_) {
        if (u < 0 || u >= n_ || v < 0 || v >= n_)
            throw ConfigError("graph: edge endpoint out of range");
        if (u == v) throw ConfigError("graph: self-loop");
        if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw ConfigError("graph: duplicate edge");
    if (root_ && (*root_ < 0 || *root_ >= n_))
        throw ConfigError("graph: root out of range");
    if (tags_.empty()) tags_.resize(static_cast<size_t>(n_));
    if (static_cast<int>(tags_.size()) != n_)
        throw ConfigError("graph: tag list size mismatch");
    adj_.resize(static_cast<size_t>(n_));
    for (const auto& [u, v] : edges_) {
        adj_[static_cast<size_t>(u)].push_back(v);
        adj_[static_cast<size_t>(v)].push_back(u);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

int RootedGraph::root_or_throw() const {
    if (!root_) throw ConfigError("graph has no root");
    return *root_;
}

int RootedGraph::max_degree() const {
    int m = 0;
    for (int v = 0; v < n_; ++v) m = std::max(m, degree(v));
    return m;
}

bool RootedGraph::connected() const {
    if (n_ <= 1) return true;
    std::vector<char> seen(static_cast<size_t>(n_), 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int w : adj_[static_cast<size_t>(u)])
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                ++reached;
                q.push_back(w);
            }
    }
    return reached == n_;
}

bool RootedGraph::is_tree() const {
    return connected() && static_cast<int>(edges_.size()) == n_ - 1;
}

std::optional<int> RootedGraph::distance(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_)
        throw ConfigError("distance: vertex out of range");
    if (u == v) return 0;
    std::vector<int> dist(static_cast<size_t>(n_), -1);
    std::deque<int> q{u};
    dist[static_cast<size_t>(u)] = 0;
    while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        for (int w : adj_[static_cast<size_t>(x)]) {
            if (dist[static_cast<size_t>(w)] >= 0) continue;
            dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(x)] + 1;
            if (w == v) return dist[static_cast<size_t>(w)];
            q.push_back(w);
        }
    }
    return std::nullopt;
}

namespace {
std::pair<int, int> bfs_farthest(const RootedGraph& g, int from) {
    std::vector<int> dist(static_cast<size_t>(g.vertex_count()), -1);
    std::deque<int> q{from};
    dist[static_cast<size_t>(from)] = 0;
    int best = from;
    while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        if (dist[static_cast<size_t>(x)] > dist[static_cast<size_t>(best)]) best = x;
        for (int w : g.neighbors(x))
            if (dist[static_cast<size_t>(w)] < 0) {
                dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(x)] + 1;
                q.push_back(w);
            }
    }
    return {best, dist[static_cast<size_t>(best)]};
}
}  // namespace

int RootedGraph::tree_diameter() const {
    if (n_ == 0) return 0;
    const auto [far1, d1] = bfs_farthest(*this, 0);
    (void)d1;
    return bfs_farthest(*this, far1).second;
}

int RootedGraph::max_tag_level() const {
    int lvl = 0;
    for (const Tag& t : tags_) lvl = std::max(lvl, t.level);
    return lvl;
}

std::vector<int> RootedGraph::vertices_with_tag(TagKind kind, int index, int level) const {
    std::vector<int> out;
    for (int v = 0; v < n_; ++v) {
        const Tag& t = tags_[static_cast<size_t>(v)];
        if (t.kind == kind && t.index == index && t.level == level) out.push_back(v);
    }
    return out;
}

uint64_t RootedGraph::content_hash() const {
    uint64_t h = 1469598103934665603ULL;
    auto mixin = [&h](uint64_t x) {
        h ^= x;
        h *= 1099511628211ULL;
    };
    mixin(static_cast<uint64_t>(n_));
    for (const auto& [u, v] : edges_) {
        mixin(static_cast<uint64_t>(u));
        mixin(static_cast<uint64_t>(v));
    }
    mixin(root_ ? static_cast<uint64_t>(*root_) + 1 : 0);
    for (const Tag& t : tags_) {
        mixin(static_cast<uint64_t>(t.kind));
        mixin(static_cast<uint64_t>(static_cast<uint32_t>(t.index)));
        mixin(static_cast<uint64_t>(static_cast<uint32_t>(t.level)));
    }
    return h;
}

std::string RootedGraph::to_json_string() const {
    nlohmann::json j;
    j["vertex_count"] = n_;
    auto edges = nlohmann::json::array();
    for (const auto& [u, v] : edges_) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    if (root_)
        j["root"] = *root_;
    else
        j["root"] = nullptr;
    auto tags = nlohmann::json::object();
    for (int v = 0; v < n_; ++v) {
        const Tag& t = tags_[static_cast<size_t>(v)];
        if (t == Tag{}) continue;  // generic level-0 tags are implicit
        tags[std::to_string(v)] = tag_to_string(t);
    }
    j["tags"] = std::move(tags);
    return j.dump(2) + "\n";
}

RootedGraph RootedGraph::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("graph file: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("vertex_count") || !j.contains("edges"))
        throw ConfigError("graph file: missing vertex_count or edges");
    for (const auto& [key, _] : j.items())
        if (key != "vertex_count" && key != "edges" && key != "root" && key != "tags")
            throw ConfigError("graph file: unknown key '" + key + "'");
    const int n = j["vertex_count"].get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("graph file: bad edge");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    std::optional<int> root;
    if (j.contains("root") && !j["root"].is_null()) root = j["root"].get<int>();
    std::vector<Tag> tags(static_cast<size_t>(n));
    if (j.contains("tags")) {
        for (const auto& [key, val] : j["tags"].items()) {
            const int v = std::stoi(key);
            if (v < 0 || v >= n) throw ConfigError("graph file: tag vertex out of range");
            tags[static_cast<size_t>(v)] = tag_from_string(val.get<std::string>());
        }
    }
    return RootedGraph(n, std::move(edges), root, std::move(tags));
}

void RootedGraph::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << to_json_string();
}

RootedGraph RootedGraph::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

double AugmentationSpec::offspring_mean() const {
    return d * (1.0 - std::exp(-lambda)) * std::exp(-2.0);
}

std::vector<std::string> AugmentationSpec::validate() const {
    if (d < 2) throw ConfigError("augmentation: d must be >= 2");
    if (h < 1) throw ConfigError("augmentation: h must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("augmentation: lambda must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("augmentation: epsilon must be strictly between 0 and 1");
    if (ell_max < 1) throw ConfigError("augmentation: ell_max must be >= 1");
    std::vector<std::string> warnings;
    if (offspring_mean() <= 1.0) {
        std::ostringstream msg;
        msg << "offspring mean m = " << offspring_mean()
            << " <= 1: the tree cannot reliably sustain the infection";
        warnings.push_back(msg.str());
    }
    return warnings;
}

RootedGraph single_vertex_graph() {
    // Tagged old_root from birth: every augmentation hangs new structure off
    // this vertex, and tags are never rewritten afterwards.
    return RootedGraph(1, {}, 0, {Tag{TagKind::old_root, 0, 0}});
}

RootedGraph build_segment(int ell) {
    if (ell < 0) throw ConfigError("build_segment: ell must be >= 0");
    std::vector<std::pair<int, int>> edges;
    std::vector<Tag> tags;
    for (int j = 0; j <= ell; ++j) {
        if (j > 0) edges.emplace_back(j - 1, j);
        tags.push_back(Tag{TagKind::line_position, j, 0});
    }
    return RootedGraph(ell + 1, std::move(edges), 0, std::move(tags));
}

namespace {
long truncated_tree_size(int d, int h) {
    long total = 0, level = 1;
    for (int i = 0; i <= h; ++i) {
        total += level;
        if (total > 100 * kDefaultGraphSizeCap) return total;  // avoid overflow
        level *= d;
    }
    return total;
}
}  // namespace

RootedGraph build_truncated_tree(int d, int h, long size_cap) {
    if (d < 1) throw ConfigError("build_truncated_tree: d must be >= 1");
    if (h < 0) throw ConfigError("build_truncated_tree: h must be >= 0");
    const long total = truncated_tree_size(d, h);
    if (total > size_cap)
        throw ConfigError("build_truncated_tree: " + std::to_string(total) +
                          " vertices exceeds cap " + std::to_string(size_cap));
    std::vector<std::pair<int, int>> edges;
    std::vector<Tag> tags;
    tags.push_back(Tag{TagKind::tree_level, 0, 0});
    // Vertices appended level by level; children of the current level follow it.
    int level_first = 0, level_count = 1, next = 1;
    for (int i = 1; i <= h; ++i) {
        for (int p = level_first; p < level_first + level_count; ++p)
            for (int c = 0; c < d; ++c) {
                edges.emplace_back(p, next++);
                tags.push_back(Tag{TagKind::tree_level, i, 0});
            }
        level_first += level_count;
        level_count *= d;
    }
    return RootedGraph(static_cast<int>(total), std::move(edges), 0, std::move(tags));
}

namespace {
RootedGraph augment(const RootedGraph& base, const AugmentationSpec& spec,
                    int line_length, bool root_at_far_end) {
    spec.validate();
    const int o = base.root_or_throw();
    if (base.degree(o) > 1)
        throw ConfigError("augment: base root must have degree <= 1");
    if (line_length < 1) throw ConfigError("augment: line length must be >= 1");
    const long tree_size = truncated_tree_size(spec.d, spec.h);
    const long total = base.vertex_count() + tree_size + line_length + 1;
    if (total > kDefaultGraphSizeCap)
        throw ConfigError("augment: output graph too large");

    const int level = base.max_tag_level() + 1;
    std::vector<std::pair<int, int>> edges = base.edges();
    std::vector<Tag> tags = base.tags();

    const RootedGraph tree = build_truncated_tree(spec.d, spec.h);
    const int tree_first = base.vertex_count();
    for (const auto& [u, v] : tree.edges())
        edges.emplace_back(tree_first + u, tree_first + v);
    for (const Tag& t : tree.tags())
        tags.push_back(Tag{TagKind::tree_level, t.index, level});

    const int line_first = tree_first + static_cast<int>(tree_size);
    for (int j = 0; j <= line_length; ++j) {
        if (j > 0) edges.emplace_back(line_first + j - 1, line_first + j);
        if (root_at_far_end && j == line_length)
            tags.push_back(Tag{TagKind::new_root, 0, level});
        else
            tags.push_back(Tag{TagKind::line_position, j, level});
    }

    edges.emplace_back(o, tree_first);           // base root -- tree root
    edges.emplace_back(tree_first, line_first);  // tree root -- line start

    const int root = root_at_far_end ? line_first + line_length : o;
    return RootedGraph(static_cast<int>(total), std::move(edges), root, std::move(tags));
}
}  // namespace

RootedGraph build_probe_graph(const RootedGraph& base, const AugmentationSpec& spec) {
    return augment(base, spec, spec.ell_max, /*root_at_far_end=*/false);
}

RootedGraph build_augmented_graph(const RootedGraph& base, const AugmentationSpec& spec,
                                  int crossing_length) {
    return augment(base, spec, crossing_length, /*root_at_far_end=*/true);
}

int AugmentLayout::line_vertex(int ell) const {
    if (ell < 0 || ell >= line_count)
        throw ConfigError("layout: line position out of range");
    return line_first + ell;
}

std::vector<int> AugmentLayout::tree_level_vertices(const RootedGraph& g, int height) const {
    return g.vertices_with_tag(TagKind::tree_level, height, level);
}

AugmentLayout augment_layout(const RootedGraph& g) {
    AugmentLayout lay;
    lay.level = g.max_tag_level();
    if (lay.level == 0) throw ConfigError("layout: graph has no augmentation level");
    int tree_last = -1, line_last = -1;
    lay.tree_first = g.vertex_count();
    lay.line_first = g.vertex_count();
    for (int v = 0; v < g.vertex_count(); ++v) {
        const Tag& t = g.tag(v);
        if (t.level != lay.level) continue;
        if (t.kind == TagKind::tree_level) {
            lay.tree_first = std::min(lay.tree_first, v);
            tree_last = std::max(tree_last, v);
        } else if (t.kind == TagKind::line_position || t.kind == TagKind::new_root) {
            lay.line_first = std::min(lay.line_first, v);
            line_last = std::max(line_last, v);
        }
    }
    if (tree_last < 0 || line_last < 0)
        throw ConfigError("layout: missing tree or line tags");
    lay.tree_count = tree_last - lay.tree_first + 1;
    lay.line_count = line_last - lay.line_first + 1;
    lay.base_count = lay.tree_first;
    lay.tree_root = lay.tree_first;
    return lay;
}

}  // namespace cproc
