#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "fd/errors.hpp"
#include "fd/words.hpp"

namespace fd {

// One identification between level-1 copies of the boundary:
// map i carries boundary point a to the same vertex as map j carries point b.
struct GluingRule {
    int i = 0, a = 0, j = 0, b = 0;
};

// Declarative description of a self-similar structure. `anchors` marks
// boundary points that are fixed points of a map (a -> i). Boundary points
// that are not fixed points still lie in the level-1 vertex set; `embedding`
// records where (a -> (i, b) meaning point a = map i applied to point b).
// Anchored points get their embedding entry (a -> (i, a)) implicitly.
struct StructureSpec {
    int n_symbols = 0;
    int boundary_size = 0;
    std::vector<GluingRule> gluing;
    std::map<int, int> anchors;
    std::map<int, std::pair<int, int>> embedding;
};

// The quotient vertex set at one subdivision level. Raw addresses are
// (cell, corner) pairs; the slot index is cell_index * n0 + (corner - 1).
// Vertex ids are dense and ordered by each class's smallest slot, so id
// order is lexicographic order of canonical addresses.
struct VertexSet {
    int level = 0;
    int n0 = 0;
    std::uint64_t n_cells = 0;
    std::uint64_t n_vertices = 0;
    std::vector<std::uint32_t> vertex_of_slot;
    std::vector<std::uint64_t> rep_of_vertex;   // canonical slot per vertex
    std::vector<std::uint32_t> boundary_vertex; // vertex id of each boundary point

    std::uint32_t vid(std::uint64_t cell, int corner) const {
        return vertex_of_slot[cell * static_cast<std::uint64_t>(n0) + (corner - 1)];
    }
};

// A validated structure: bounds-checked gluing, connected level-1 cell graph,
// and a total boundary embedding. All vertex-set construction lives here.
class SelfSimilarStructure {
  public:
    SelfSimilarStructure() = default; // empty shell; real instances come from build()
    static SelfSimilarStructure build(StructureSpec spec);

    int n_symbols() const { return spec_.n_symbols; }
    int boundary_size() const { return spec_.boundary_size; }
    const StructureSpec& spec() const { return spec_; }

    // Where boundary point a sits inside level 1: (map, boundary point).
    std::pair<int, int> embed(int a) const;

    std::uint64_t cell_count(int level) const;
    Word child_cell(const Word& w, int symbol) const;
    std::vector<Word> words(int level) const;

    // Push the address (cell w, corner a) down `steps` levels without leaving
    // the point: each step rewrites corner a via its embedding.
    std::pair<Word, int> descend(Word w, int a, int steps) const;

    // Quotient vertex set built from scratch: every gluing rule at every
    // level k <= m, pushed down to level m along embeddings.
    VertexSet vertex_set(int level) const;

    // Same partition grown one level at a time from the previous level's
    // classes; exists as an independent construction to cross-check.
    VertexSet refine(const VertexSet& prev) const;

  private:
    explicit SelfSimilarStructure(StructureSpec spec) : spec_(std::move(spec)) {}
    StructureSpec spec_;
    std::vector<std::pair<int, int>> embed_; // 0-based lookup of embedding
};

// Raw address budget for a single vertex set; beyond this the dense tables
// stop being reasonable and the request is refused.
inline constexpr std::uint64_t kMaxSlots = 10'000'000;

} // namespace fd
