#include "fd/structure.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fd {

namespace {

// Union-find over dense 64-bit slots, with the smallest slot of each class
// kept as its root so canonical representatives fall out for free.
class UnionFind {
  public:
    explicit UnionFind(std::uint64_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::uint64_t{0});
    }

    std::uint64_t find(std::uint64_t x) {
        std::uint64_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            std::uint64_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    void unite(std::uint64_t x, std::uint64_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (x < y)
            parent_[y] = x;
        else
            parent_[x] = y;
    }

    std::uint64_t size() const { return parent_.size(); }

  private:
    std::vector<std::uint64_t> parent_;
};

VertexSet finalize(UnionFind& uf, int level, int n0, std::uint64_t n_cells) {
    VertexSet vs;
    vs.level = level;
    vs.n0 = n0;
    vs.n_cells = n_cells;
    vs.vertex_of_slot.resize(uf.size());
    // Slots are scanned in increasing order, so ids are assigned in the order
    // of each class's smallest member.
    for (std::uint64_t s = 0; s < uf.size(); ++s) {
        std::uint64_t root = uf.find(s);
        if (root == s) {
            vs.vertex_of_slot[s] = static_cast<std::uint32_t>(vs.rep_of_vertex.size());
            vs.rep_of_vertex.push_back(s);
        } else {
            vs.vertex_of_slot[s] = vs.vertex_of_slot[root];
        }
    }
    vs.n_vertices = vs.rep_of_vertex.size();
    return vs;
}

} // namespace

SelfSimilarStructure SelfSimilarStructure::build(StructureSpec spec) {
    const int n = spec.n_symbols;
    const int n0 = spec.boundary_size;
    if (n < 2) throw ConfigError("need at least two maps, got " + std::to_string(n));
    if (n0 < 2) throw ConfigError("need at least two boundary points, got " + std::to_string(n0));
    if (spec.gluing.empty()) throw DisconnectedStructure("no gluing rules: level-1 cells cannot touch");

    for (const auto& g : spec.gluing) {
        if (g.i < 1 || g.i > n || g.j < 1 || g.j > n)
            throw InvalidSymbolIndex("gluing rule references map " + std::to_string(g.i < 1 || g.i > n ? g.i : g.j) +
                                     " outside 1.." + std::to_string(n));
        if (g.a < 1 || g.a > n0 || g.b < 1 || g.b > n0)
            throw InvalidSymbolIndex("gluing rule references boundary point " +
                                     std::to_string(g.a < 1 || g.a > n0 ? g.a : g.b) + " outside 1.." +
                                     std::to_string(n0));
        if (g.i == g.j)
            throw ConfigError("gluing rule identifies two corners of the same cell " + std::to_string(g.i));
    }
    for (size_t x = 0; x < spec.gluing.size(); ++x)
        for (size_t y = x + 1; y < spec.gluing.size(); ++y) {
            const auto& p = spec.gluing[x];
            const auto& q = spec.gluing[y];
            const bool same = p.i == q.i && p.a == q.a && p.j == q.j && p.b == q.b;
            const bool flipped = p.i == q.j && p.a == q.b && p.j == q.i && p.b == q.a;
            if (same || flipped)
                throw DuplicateGluing("rule (" + std::to_string(q.i) + "," + std::to_string(q.a) + ")~(" +
                                      std::to_string(q.j) + "," + std::to_string(q.b) + ") appears twice");
        }

    for (const auto& [a, i] : spec.anchors) {
        if (a < 1 || a > n0)
            throw InvalidSymbolIndex("anchor for boundary point " + std::to_string(a) + " outside 1.." +
                                     std::to_string(n0));
        if (i < 1 || i > n)
            throw InvalidSymbolIndex("anchor references map " + std::to_string(i) + " outside 1.." +
                                     std::to_string(n));
    }
    {
        std::map<int, int> seen; // symbol -> anchored point
        for (const auto& [a, i] : spec.anchors) {
            auto [it, fresh] = seen.emplace(i, a);
            if (!fresh)
                throw ConfigError("map " + std::to_string(i) + " anchors both boundary points " +
                                  std::to_string(it->second) + " and " + std::to_string(a) +
                                  "; a contraction has one fixed point");
        }
    }
    for (const auto& [a, ib] : spec.embedding) {
        if (a < 1 || a > n0 || ib.second < 1 || ib.second > n0)
            throw InvalidSymbolIndex("embedding entry references a boundary point outside 1.." +
                                     std::to_string(n0));
        if (ib.first < 1 || ib.first > n)
            throw InvalidSymbolIndex("embedding entry references map " + std::to_string(ib.first) +
                                     " outside 1.." + std::to_string(n));
        auto anchor = spec.anchors.find(a);
        if (anchor != spec.anchors.end() && (ib.first != anchor->second || ib.second != a))
            throw ConfigError("boundary point " + std::to_string(a) +
                              " has an embedding entry that contradicts its anchor");
    }

    SelfSimilarStructure st(std::move(spec));

    // Merge anchors into one total embedding lookup.
    st.embed_.assign(n0, {0, 0});
    for (const auto& [a, i] : st.spec_.anchors) st.embed_[a - 1] = {i, a};
    for (const auto& [a, ib] : st.spec_.embedding) st.embed_[a - 1] = ib;
    for (int a = 1; a <= n0; ++a)
        if (st.embed_[a - 1].first == 0)
            throw EmbeddingIncomplete("boundary point " + std::to_string(a) +
                                      " has neither an anchor nor an embedding entry");

    // The level-1 cell graph must be connected, otherwise the set splits.
    UnionFind cells(static_cast<std::uint64_t>(n));
    for (const auto& g : st.spec_.gluing) cells.unite(g.i - 1, g.j - 1);
    std::uint64_t root = cells.find(0);
    for (int i = 1; i < n; ++i)
        if (cells.find(i) != root)
            throw DisconnectedStructure("level-1 cells split into disconnected groups");

    return st;
}

std::pair<int, int> SelfSimilarStructure::embed(int a) const {
    if (a < 1 || a > spec_.boundary_size)
        throw InvalidSymbolIndex("boundary point " + std::to_string(a) + " outside 1.." +
                                 std::to_string(spec_.boundary_size));
    return embed_[a - 1];
}

std::uint64_t SelfSimilarStructure::cell_count(int level) const {
    if (level < 0) throw ConfigError("negative level " + std::to_string(level));
    std::uint64_t cells = word_count(spec_.n_symbols, level);
    if (cells > kMaxSlots / static_cast<std::uint64_t>(spec_.boundary_size))
        throw LevelOverflow("level " + std::to_string(level) + " needs " + std::to_string(cells) +
                            " cells; limit is " +
                            std::to_string(kMaxSlots / static_cast<std::uint64_t>(spec_.boundary_size)));
    return cells;
}

Word SelfSimilarStructure::child_cell(const Word& w, int symbol) const {
    if (symbol < 1 || symbol > spec_.n_symbols)
        throw InvalidSymbolIndex("symbol " + std::to_string(symbol) + " outside 1.." +
                                 std::to_string(spec_.n_symbols));
    Word c = w;
    c.push_back(symbol);
    return c;
}

std::vector<Word> SelfSimilarStructure::words(int level) const {
    std::uint64_t n = cell_count(level);
    std::vector<Word> out;
    out.reserve(n);
    for (std::uint64_t idx = 0; idx < n; ++idx)
        out.push_back(index_to_word(idx, spec_.n_symbols, level));
    return out;
}

std::pair<Word, int> SelfSimilarStructure::descend(Word w, int a, int steps) const {
    for (int s = 0; s < steps; ++s) {
        auto [i, b] = embed(a);
        w.push_back(i);
        a = b;
    }
    return {std::move(w), a};
}

VertexSet SelfSimilarStructure::vertex_set(int level) const {
    const int n = spec_.n_symbols;
    const int n0 = spec_.boundary_size;
    const std::uint64_t cells = cell_count(level);
    UnionFind uf(cells * static_cast<std::uint64_t>(n0));

    auto slot = [&](const Word& w, int a) {
        return word_to_index(w, n) * static_cast<std::uint64_t>(n0) + static_cast<std::uint64_t>(a - 1);
    };

    // Every identification at level m is a level-k gluing rule (k <= m)
    // pushed down the remaining m-k levels along the boundary embedding.
    for (int k = 1; k <= level; ++k) {
        const std::uint64_t prefixes = word_count(n, k - 1);
        for (std::uint64_t p = 0; p < prefixes; ++p) {
            const Word prefix = index_to_word(p, n, k - 1);
            for (const auto& g : spec_.gluing) {
                Word left = prefix;
                left.push_back(g.i);
                Word right = prefix;
                right.push_back(g.j);
                auto [lw, la] = descend(std::move(left), g.a, level - k);
                auto [rw, rb] = descend(std::move(right), g.b, level - k);
                uf.unite(slot(lw, la), slot(rw, rb));
            }
        }
    }

    VertexSet vs = finalize(uf, level, n0, cells);
    vs.boundary_vertex.resize(n0);
    for (int a = 1; a <= n0; ++a) {
        auto [w, c] = descend({}, a, level);
        vs.boundary_vertex[a - 1] = vs.vertex_of_slot[slot(w, c)];
    }
    return vs;
}

VertexSet SelfSimilarStructure::refine(const VertexSet& prev) const {
    const int n = spec_.n_symbols;
    const int n0 = spec_.boundary_size;
    const int level = prev.level + 1;
    const std::uint64_t cells = cell_count(level);
    UnionFind uf(cells * static_cast<std::uint64_t>(n0));

    auto slot = [&](std::uint64_t cell, int a) {
        return cell * static_cast<std::uint64_t>(n0) + static_cast<std::uint64_t>(a - 1);
    };

    // Each parent-level address survives one level down via the embedding;
    // addresses that shared a vertex must keep sharing it.
    std::vector<std::uint64_t> image_of_vertex(prev.n_vertices, UINT64_MAX);
    for (std::uint64_t cell = 0; cell < prev.n_cells; ++cell)
        for (int a = 1; a <= n0; ++a) {
            auto [i, b] = embed(a);
            std::uint64_t child = cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i - 1);
            std::uint64_t s = slot(child, b);
            std::uint32_t v = prev.vid(cell, a);
            if (image_of_vertex[v] == UINT64_MAX)
                image_of_vertex[v] = s;
            else
                uf.unite(image_of_vertex[v], s);
        }

    // Fresh identifications introduced at this level: the gluing rules under
    // every parent cell.
    for (std::uint64_t cell = 0; cell < prev.n_cells; ++cell)
        for (const auto& g : spec_.gluing) {
            std::uint64_t ci = cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(g.i - 1);
            std::uint64_t cj = cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(g.j - 1);
            uf.unite(slot(ci, g.a), slot(cj, g.b));
        }

    VertexSet vs = finalize(uf, level, n0, cells);
    vs.boundary_vertex.resize(n0);
    for (int a = 1; a <= n0; ++a) {
        auto [w, c] = descend({}, a, level);
        vs.boundary_vertex[a - 1] = vs.vertex_of_slot[word_to_index(w, n) * static_cast<std::uint64_t>(n0) +
                                                      static_cast<std::uint64_t>(c - 1)];
    }
    return vs;
}

} // namespace fd
