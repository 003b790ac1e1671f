#include "specmono/monodromy.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <sstream>

namespace specmono {

int Covering::index_of(const std::string& id) const {
    for (size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return static_cast<int>(i);
    return -1;
}

namespace {

bool same_point(const Vec2& a, const Vec2& b) { return (a - b).norm() <= 1e-12 * (1.0 + a.norm()); }

std::vector<Vec2> common_anchors(const PseudoChart& a, const PseudoChart& b) {
    std::vector<Vec2> out;
    for (const Vec2& p : a.anchors)
        for (const Vec2& q : b.anchors)
            if (same_point(p, q)) {
                out.push_back(p);
                break;
            }
    return out;
}

std::string matrix_text(const Mat2i& m) {
    std::ostringstream os;
    os << "[[" << m(0, 0) << "," << m(0, 1) << "],[" << m(1, 0) << "," << m(1, 1) << "]]";
    return os.str();
}

}  // namespace

Covering make_covering(const std::vector<PseudoChart>& charts) {
    Covering cov;
    const int n = static_cast<int>(charts.size());
    for (const PseudoChart& pc : charts) cov.ids.push_back(pc.id);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::vector<Vec2> s = common_anchors(charts[i], charts[j]);
            if (s.empty()) continue;
            cov.edges.emplace_back(i, j);
            cov.shared[{i, j}] = std::move(s);
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto ij = cov.shared.find({i, j});
            if (ij == cov.shared.end()) continue;
            for (int k = j + 1; k < n; ++k) {
                if (!cov.shared.count({i, k}) || !cov.shared.count({j, k})) continue;
                const bool common = std::any_of(ij->second.begin(), ij->second.end(), [&](const Vec2& p) {
                    return std::any_of(charts[k].anchors.begin(), charts[k].anchors.end(),
                                       [&](const Vec2& q) { return same_point(p, q); });
                });
                if (common) cov.triples.push_back({i, j, k});
            }
        }
    return cov;
}

Transition transition_detail(const PseudoChart& pc_i, const PseudoChart& pc_j, int samples, double threshold) {
    if (samples < 1) fail(ErrorKind::InvalidParameter, "samples must be positive");
    std::vector<Vec2> pts;
    for (const Vec2& a : pc_i.anchors)
        if (pc_j.in_domain(a)) pts.push_back(a);
    for (const Vec2& a : pc_j.anchors)
        if (pc_i.in_domain(a) && std::none_of(pts.begin(), pts.end(), [&](const Vec2& p) { return same_point(p, a); }))
            pts.push_back(a);
    if (pts.empty()) fail(ErrorKind::NoOverlap, "pseudo-charts " + pc_i.id + " and " + pc_j.id + " do not overlap");
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Vec2> chosen;
    const size_t m = std::min(pts.size(), static_cast<size_t>(samples));
    for (size_t t = 0; t < m; ++t) chosen.push_back(pts[(t * pts.size()) / m]);

    std::vector<Mat2> ds;
    Mat2 mean = Mat2::Zero();
    for (const Vec2& c : chosen) {
        ds.push_back(pc_i.differential(c) * pc_j.differential(c).inverse());
        mean += ds.back();
    }
    mean /= static_cast<double>(ds.size());
    Transition t;
    t.matrix = round_matrix(mean);
    t.samples = static_cast<int>(ds.size());
    for (const Mat2& d : ds) {
        t.deviation = std::max(t.deviation, max_abs(d - t.matrix.cast<double>()));
        t.spread = std::max(t.spread, max_abs(d - mean));
    }
    std::ostringstream os;
    os << pc_i.id << " -> " << pc_j.id;
    if (t.spread >= threshold) {
        os << ": sample spread " << t.spread;
        fail(ErrorKind::InconsistentSamples, os.str());
    }
    if (t.deviation >= threshold) {
        os << ": pre-rounding deviation " << t.deviation;
        fail(ErrorKind::NonIntegerTransition, os.str());
    }
    const int det = t.matrix.determinant();
    if (det != 1 && det != -1) {
        os << ": determinant " << det;
        fail(ErrorKind::NonUnimodular, os.str());
    }
    return t;
}

Mat2i transition_matrix(const PseudoChart& pc_i, const PseudoChart& pc_j, int samples) {
    return transition_detail(pc_i, pc_j, samples).matrix;
}

const Mat2i& TransitionCocycle::at(int i, int j) const {
    auto it = matrices.find({i, j});
    if (it == matrices.end()) {
        const std::string a = i >= 0 && i < static_cast<int>(covering.ids.size()) ? covering.ids[i] : "?";
        const std::string b = j >= 0 && j < static_cast<int>(covering.ids.size()) ? covering.ids[j] : "?";
        fail(ErrorKind::MissingEdge, "no edge between " + a + " and " + b);
    }
    return it->second;
}

void verify_cocycle(TransitionCocycle& c) {
    for (const auto& [i, j] : c.covering.edges) {
        const Mat2i& mij = c.at(i, j);
        const Mat2i& mji = c.at(j, i);
        if (mij * mji != Mat2i::Identity())
            fail(ErrorKind::CocycleViolation, "M_ji != M_ij^-1 on edge " + c.covering.ids[i] + "-" + c.covering.ids[j] +
                                                  ": " + matrix_text(mij) + " vs " + matrix_text(mji));
    }
    c.triple_checks.clear();
    for (const auto& t : c.covering.triples) {
        const auto [i, j, k] = t;
        const bool ok = c.at(i, k) == c.at(i, j) * c.at(j, k);
        c.triple_checks.push_back({t, ok});
        if (!ok)
            fail(ErrorKind::CocycleViolation, "M_ik != M_ij M_jk on triple (" + c.covering.ids[i] + ", " +
                                                  c.covering.ids[j] + ", " + c.covering.ids[k] + ")");
    }
}

TransitionCocycle build_cocycle(const std::vector<PseudoChart>& charts, const Covering& covering, int samples,
                                Exec exec) {
    TransitionCocycle c;
    c.covering = covering;
    const long ne = static_cast<long>(covering.edges.size());
    std::vector<Transition> fwd(covering.edges.size()), bwd(covering.edges.size());
    std::vector<std::exception_ptr> errors(covering.edges.size());
    auto work = [&](long e) {
        const auto [i, j] = covering.edges[static_cast<size_t>(e)];
        try {
            fwd[static_cast<size_t>(e)] = transition_detail(charts[i], charts[j], samples);
            bwd[static_cast<size_t>(e)] = transition_detail(charts[j], charts[i], samples);
        } catch (...) {
            errors[static_cast<size_t>(e)] = std::current_exception();
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long e = 0; e < ne; ++e) work(e);
    } else {
        for (long e = 0; e < ne; ++e) work(e);
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    for (size_t e = 0; e < covering.edges.size(); ++e) {
        const auto [i, j] = covering.edges[e];
        c.matrices[{i, j}] = fwd[e].matrix;
        c.matrices[{j, i}] = bwd[e].matrix;
        c.deviation[{i, j}] = fwd[e].deviation;
        c.deviation[{j, i}] = bwd[e].deviation;
    }
    verify_cocycle(c);
    return c;
}

HolonomyClass holonomy(const TransitionCocycle& cocycle, const std::vector<std::string>& loop_in) {
    std::vector<std::string> loop = loop_in;
    if (loop.size() >= 2 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 2) fail(ErrorKind::NotALoop, "a loop needs at least two open sets");
    std::vector<int> idx;
    for (const std::string& id : loop) {
        const int i = cocycle.covering.index_of(id);
        if (i < 0) fail(ErrorKind::NotALoop, "unknown open set " + id);
        idx.push_back(i);
    }
    Mat2i h = Mat2i::Identity();
    for (size_t t = 0; t < idx.size(); ++t) h = h * cocycle.at(idx[t], idx[(t + 1) % idx.size()]);
    return HolonomyClass::of(h, loop);
}

ConjugacyResult conjugacy_equivalent(const Mat2i& A, const Mat2i& B, int bound) {
    ConjugacyResult r;
    if (A.determinant() != B.determinant() || A.trace() != B.trace()) return r;
    for (int a = -bound; a <= bound; ++a)
        for (int b = -bound; b <= bound; ++b)
            for (int c = -bound; c <= bound; ++c)
                for (int d = -bound; d <= bound; ++d) {
                    const int det = a * d - b * c;
                    if (det != 1 && det != -1) continue;
                    Mat2i P;
                    P << a, b, c, d;
                    if (P * A == B * P) {
                        r.equivalent = true;
                        r.conjugator = P;
                        return r;
                    }
                }
    r.undecided = true;
    return r;
}

ConjugacyResult adjoint_compare(const HolonomyClass& spectral, const HolonomyClass& classical, int bound) {
    const Mat2i adj = inverse_unimodular(classical.representative).transpose();
    return conjugacy_equivalent(spectral.representative, adj, bound);
}

}  // namespace specmono
