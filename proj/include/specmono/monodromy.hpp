#pragma once

#include "specmono/charts.hpp"
#include "specmono/models.hpp"

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace specmono {

struct Covering {
    std::vector<std::string> ids;
    std::vector<std::pair<int, int>> edges;  // i < j
    std::vector<std::array<int, 3>> triples; // i < j < k
    std::map<std::pair<int, int>, std::vector<Vec2>> shared;  // sample points per edge

    int index_of(const std::string& id) const;
};

/// Edges join pseudo-charts whose anchor sets intersect; triples share an
/// anchor common to all three.
Covering make_covering(const std::vector<PseudoChart>& charts);

struct Transition {
    Mat2i matrix = Mat2i::Identity();
    double deviation = 0.0;  // max over samples of |M_s - round|
    double spread = 0.0;     // max over samples of |M_s - mean|
    int samples = 0;
};

/// d f_i (d f_j)^-1 averaged over common points and rounded.
Transition transition_detail(const PseudoChart& pc_i, const PseudoChart& pc_j, int samples,
                             double threshold = 0.2);
Mat2i transition_matrix(const PseudoChart& pc_i, const PseudoChart& pc_j, int samples);

struct TripleCheck {
    std::array<int, 3> triple;
    bool holds = false;
};

struct TransitionCocycle {
    Covering covering;
    std::map<std::pair<int, int>, Mat2i> matrices;  // both orientations
    std::map<std::pair<int, int>, double> deviation;
    std::vector<TripleCheck> triple_checks;

    const Mat2i& at(int i, int j) const;
};

/// Throws CocycleViolation naming the first failing edge or triple.
void verify_cocycle(TransitionCocycle& cocycle);

TransitionCocycle build_cocycle(const std::vector<PseudoChart>& charts, const Covering& covering, int samples = 8,
                                Exec exec = Exec::Parallel);

/// Ordered product M_{l0 l1} M_{l1 l2} ... M_{l(n-1) l0}; the loop may repeat
/// its first identifier at the end.
HolonomyClass holonomy(const TransitionCocycle& cocycle, const std::vector<std::string>& loop);

struct ConjugacyResult {
    bool equivalent = false;
    bool undecided = false;  // invariants agree but no conjugator within the bound
    Mat2i conjugator = Mat2i::Identity();
    explicit operator bool() const { return equivalent; }
};

/// Searches P in GL(2,Z) with |entries| <= bound and P A P^-1 = B.
ConjugacyResult conjugacy_equivalent(const Mat2i& A, const Mat2i& B, int bound = 5);

/// Spectral class against transpose(inverse(classical)).
ConjugacyResult adjoint_compare(const HolonomyClass& spectral, const HolonomyClass& classical, int bound = 5);

}  // namespace specmono
