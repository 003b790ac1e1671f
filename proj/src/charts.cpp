#include "specmono/charts.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <sstream>

namespace specmono {

Vec2 chi_inverse(const cplx& z, double eps) { return Vec2(z.real(), z.imag() / eps); }

Vec2 MicroChart::predict(const Vec2i& k) const {
    const Vec2 kd = k.cast<double>();
    Vec2 out = A * kd + b;
    if (has_quadratic) out += quadratic * Eigen::Vector3d(kd.x() * kd.x(), kd.x() * kd.y(), kd.y() * kd.y());
    return out;
}

namespace {

Vec2 canonical(Vec2 d) {
    if (d.x() < 0.0 || (d.x() == 0.0 && d.y() < 0.0)) d = -d;
    return d;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Lagrange-Gauss reduction of the columns of B; returns U with B U reduced.
Mat2i gauss_reduce(const Mat2& B) {
    Vec2 u = B.col(0), v = B.col(1);
    Mat2i U = Mat2i::Identity();
    for (int it = 0; it < 200; ++it) {
        if (u.squaredNorm() > v.squaredNorm()) {
            std::swap(u, v);
            U.col(0).swap(U.col(1));
        }
        const long m = std::lround(u.dot(v) / u.squaredNorm());
        if (m == 0) break;
        v -= static_cast<double>(m) * u;
        U.col(1) -= static_cast<int>(m) * U.col(0);
    }
    return U;
}

bool labels_injective(const std::vector<Vec2i>& labels) {
    std::set<std::pair<int, int>> seen;
    for (const Vec2i& k : labels)
        if (!seen.emplace(k.x(), k.y()).second) return false;
    return true;
}

struct AffineFit {
    Mat2 A;
    Vec2 b;
    Eigen::Matrix<double, 2, 3> Q = Eigen::Matrix<double, 2, 3>::Zero();
};

AffineFit least_squares(const std::vector<Vec2>& q, const std::vector<Vec2i>& labels, bool quadratic) {
    const int n = static_cast<int>(q.size());
    const int cols = quadratic ? 6 : 3;
    Eigen::MatrixXd X(n, cols), Y(n, 2);
    for (int i = 0; i < n; ++i) {
        const double k1 = labels[i].x(), k2 = labels[i].y();
        X(i, 0) = k1;
        X(i, 1) = k2;
        X(i, 2) = 1.0;
        if (quadratic) {
            X(i, 3) = k1 * k1;
            X(i, 4) = k1 * k2;
            X(i, 5) = k2 * k2;
        }
        Y.row(i) = q[i].transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) fail(ErrorKind::DegenerateBasis, "labels do not span the lattice");
    const Eigen::MatrixXd sol = qr.solve(Y);
    AffineFit f;
    f.A = sol.topRows(2).transpose();
    f.b = sol.row(2).transpose();
    if (quadratic) f.Q = sol.bottomRows(3).transpose();
    return f;
}

Vec2 model_at(const AffineFit& f, const Vec2i& k) {
    const Vec2 kd = k.cast<double>();
    return f.A * kd + f.b + f.Q * Eigen::Vector3d(kd.x() * kd.x(), kd.x() * kd.y(), kd.y() * kd.y());
}

/// Shortest nearest-neighbour difference clusters give the first basis guess.
Mat2 estimate_basis(const std::vector<Vec2>& q, const FitOptions& opt) {
    const size_t n = q.size();
    const size_t kn = std::min<size_t>(static_cast<size_t>(opt.neighbors), n - 1);
    std::vector<Vec2> diffs;
    diffs.reserve(n * kn);
    std::vector<std::pair<double, size_t>> dist(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) dist[j] = {(q[j] - q[i]).squaredNorm(), j};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kn + 1), dist.end());
        for (size_t t = 1; t <= kn; ++t) diffs.push_back(canonical(q[dist[t].second] - q[i]));
    }
    std::sort(diffs.begin(), diffs.end(), [](const Vec2& a, const Vec2& b) { return a.squaredNorm() < b.squaredNorm(); });
    const double L1 = diffs.front().norm();
    if (!(L1 > 1e-9)) fail(ErrorKind::DegenerateBasis, "coincident points in the rectangle");
    const double rad = opt.cluster_radius * L1;

    auto cluster_mean = [&](const Vec2& seed) {
        Vec2 sum = Vec2::Zero();
        int count = 0;
        for (const Vec2& d : diffs)
            if ((d - seed).norm() <= rad) {
                sum += d;
                ++count;
            }
        return Vec2(sum / count);
    };
    const Vec2 b1 = cluster_mean(diffs.front());
    const Vec2* second = nullptr;
    for (const Vec2& d : diffs) {
        const double m = std::round(d.dot(b1) / b1.squaredNorm());
        if ((d - m * b1).norm() <= rad) continue;  // on the line of b1
        second = &d;
        break;
    }
    if (!second) fail(ErrorKind::DegenerateBasis, "no second independent difference");
    const Vec2 b2 = cluster_mean(*second);
    const double s = std::abs(cross(b1, b2)) / (b1.norm() * b2.norm());
    if (s < opt.min_sin) {
        std::ostringstream os;
        os << "shortest independent differences nearly parallel (|sin| = " << s << ")";
        fail(ErrorKind::DegenerateBasis, os.str());
    }
    Mat2 B;
    B.col(0) = b1;
    B.col(1) = b2;
    return B;
}

/// Unimodular W so that A W has the normalized column order and signs.
Mat2i normalizing_transform(const Mat2& A) {
    const Mat2i U = gauss_reduce(A);
    const Mat2 R = A * U.cast<double>();
    auto slope = [](const Vec2& v) { return std::abs(v.y()) / v.norm(); };
    Mat2i S = Mat2i::Identity();
    if (slope(R.col(1)) < slope(R.col(0)) - 1e-12) S << 0, 1, 1, 0;
    Mat2 RS = R * S.cast<double>();
    const Vec2 first = RS.col(0);
    if (first.x() < 0.0 || (first.x() == 0.0 && first.y() < 0.0)) S.col(0) *= -1;
    RS = R * S.cast<double>();
    if (RS.determinant() < 0.0) S.col(1) *= -1;
    return U * S;
}

}  // namespace

MicroChart fit_micro_chart(const std::vector<cplx>& points, const GoodRectangle& rect, const FitOptions& opt) {
    const size_t n = points.size();
    if (n < 6) fail(ErrorKind::InsufficientPoints, std::to_string(n) + " points in the rectangle, need 6");
    const double h = rect.h, eps = rect.eps;
    const Vec2 centre = chi_inverse(rect.center, eps);
    std::vector<Vec2> q(n);
    for (size_t i = 0; i < n; ++i) q[i] = (chi_inverse(points[i], eps) - centre) / h;

    const Mat2 B = estimate_basis(q, opt);
    const Mat2 Bred = B * gauss_reduce(B).cast<double>();
    size_t origin = 0;
    for (size_t i = 1; i < n; ++i)
        if (q[i].squaredNorm() < q[origin].squaredNorm()) origin = i;

    const Mat2 Binv = Bred.inverse();
    std::vector<Vec2i> labels(n);
    for (size_t i = 0; i < n; ++i) labels[i] = (Binv * (q[i] - q[origin])).array().round().cast<int>();

    bool converged = false;
    int it = 0;
    AffineFit fit;
    while (it < opt.max_iterations) {
        ++it;
        if (!labels_injective(labels)) fail(ErrorKind::NoConvergence, "label collision during assignment");
        fit = least_squares(q, labels, false);
        if (std::abs(fit.A.determinant()) < 1e-12) fail(ErrorKind::DegenerateBasis, "singular affine fit");
        const Mat2 Ainv = fit.A.inverse();
        std::vector<Vec2i> next(n);
        for (size_t i = 0; i < n; ++i) next[i] = (Ainv * (q[i] - fit.b)).array().round().cast<int>();
        if (next == labels) {
            converged = true;
            break;
        }
        labels = std::move(next);
    }
    if (!converged)
        fail(ErrorKind::NoConvergence, "labels did not stabilize within " + std::to_string(opt.max_iterations) + " passes");

    const Mat2i W = normalizing_transform(fit.A);
    const Mat2i Winv = inverse_unimodular(W);
    for (Vec2i& k : labels) k = Winv * k;
    const Vec2i shift = labels[origin];
    for (Vec2i& k : labels) k -= shift;
    if (!labels_injective(labels)) fail(ErrorKind::NoConvergence, "label collision after normalization");

    const bool quad = opt.quadratic && n >= 12;
    fit = least_squares(q, labels, quad);
    const Mat2 Ainv = fit.A.inverse();
    double res = 0.0, lres = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 r = q[i] - model_at(fit, labels[i]);
        res = std::max(res, r.norm());
        lres = std::max(lres, (Ainv * r).cwiseAbs().maxCoeff());
    }

    MicroChart mc;
    mc.rectangle = rect;
    mc.labels = std::move(labels);
    mc.positions.resize(n);
    for (size_t i = 0; i < n; ++i) mc.positions[i] = centre + h * q[i];
    mc.A = h * fit.A;
    mc.b = centre + h * fit.b;
    mc.has_quadratic = quad;
    mc.quadratic = h * fit.Q;
    mc.residual = h * res;
    mc.relative_residual = res;
    mc.label_residual = lres;
    mc.iterations = it;
    if (lres > opt.label_tolerance) {
        std::ostringstream os;
        os << "label residual " << lres << " exceeds " << opt.label_tolerance;
        fail(ErrorKind::ResidualTooLarge, os.str());
    }
    return mc;
}

MicroChart fit_micro_chart(const SpectrumCloud& cloud, const GoodRectangle& rect, const FitOptions& opt) {
    const std::vector<size_t> idx = cloud.select(rect);
    std::vector<cplx> pts;
    pts.reserve(idx.size());
    for (size_t i : idx) pts.push_back(cloud.points[i].mu);
    MicroChart mc = fit_micro_chart(pts, rect, opt);
    mc.indices = idx;
    return mc;
}

std::vector<std::pair<int, int>> monomials(int degree) {
    std::vector<std::pair<int, int>> m;
    for (int t = 0; t <= degree; ++t)
        for (int a = t; a >= 0; --a) m.emplace_back(a, t - a);
    return m;
}

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

Eigen::VectorXd basis_values(const std::vector<std::pair<int, int>>& mono, double x, double y) {
    Eigen::VectorXd v(static_cast<long>(mono.size()));
    for (size_t i = 0; i < mono.size(); ++i) v[static_cast<long>(i)] = ipow(x, mono[i].first) * ipow(y, mono[i].second);
    return v;
}

std::string anchor_text(const Vec2& a) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << a.x() << ", " << a.y() << ")";
    return os.str();
}

}  // namespace

bool PseudoChart::in_domain(const Vec2& c) const {
    for (const Vec2& a : anchors)
        if ((c - a).norm() <= domain_radius) return true;
    return false;
}

Vec2 PseudoChart::value(const Vec2& c) const {
    if (!in_domain(c)) fail(ErrorKind::OutsideDomain, "point " + anchor_text(c) + " outside the pseudo-chart domain");
    const auto mono = monomials(degree);
    const Vec2 x = (c - origin) / scale;
    return coefficients * basis_values(mono, x.x(), x.y());
}

Mat2 PseudoChart::differential(const Vec2& c) const {
    if (!in_domain(c)) fail(ErrorKind::OutsideDomain, "point " + anchor_text(c) + " outside the pseudo-chart domain");
    const auto mono = monomials(degree);
    const Vec2 x = (c - origin) / scale;
    const long nm = static_cast<long>(mono.size());
    Eigen::MatrixXd dm(nm, 2);
    for (long i = 0; i < nm; ++i) {
        const auto [a, b] = mono[static_cast<size_t>(i)];
        dm(i, 0) = a == 0 ? 0.0 : a * ipow(x.x(), a - 1) * ipow(x.y(), b);
        dm(i, 1) = b == 0 ? 0.0 : b * ipow(x.x(), a) * ipow(x.y(), b - 1);
    }
    return coefficients * dm / scale;
}

Mat2 leading_term_differential(const PseudoChart& pc, const Vec2& c) { return pc.differential(c); }

PseudoChart assemble_from_micro_charts(const std::vector<MicroChart>& micro, const std::vector<Vec2>& anchors,
                                       double h, double eps, double delta, const PseudoChartOptions& opt) {
    const size_t R = anchors.size();
    if (R < 3) fail(ErrorKind::InvalidParameter, "a pseudo-chart needs at least three anchors");
    if (micro.size() != R) fail(ErrorKind::InvalidParameter, "one micro-chart per anchor required");
    const double w = std::pow(h, delta) / opt.C;
    const double link = opt.link_radius > 0.0 ? opt.link_radius : 0.5 * w * (1.0 + 1e-9);

    PseudoChart pc;
    pc.h = h;
    pc.eps = eps;
    pc.delta = delta;
    pc.anchors = anchors;
    pc.micro_charts = micro;
    pc.degree = opt.degree;

    size_t ref = 0;
    if (opt.reference >= 0) {
        ref = static_cast<size_t>(opt.reference);
        if (ref >= R) fail(ErrorKind::InvalidParameter, "reference anchor out of range");
    } else {
        Vec2 mean = Vec2::Zero();
        for (const Vec2& a : anchors) mean += a;
        mean /= static_cast<double>(R);
        for (size_t i = 1; i < R; ++i)
            if ((anchors[i] - mean).norm() < (anchors[ref] - mean).norm()) ref = i;
    }
    pc.reference = static_cast<int>(ref);
    pc.alignment_frame = micro[ref].A;

    // shortest-link spanning tree from the reference rectangle
    std::vector<Mat2i> frames(R, Mat2i::Identity());
    std::vector<double> dev(R, 0.0);
    std::vector<bool> in_tree(R, false);
    std::vector<double> best(R, std::numeric_limits<double>::infinity());
    std::vector<size_t> parent(R, ref);
    in_tree[ref] = true;
    for (size_t j = 0; j < R; ++j)
        if (j != ref) best[j] = (anchors[j] - anchors[ref]).norm();
    auto matching = [&](size_t i, size_t j, Mat2i& N) {
        const Mat2 M = micro[i].A.inverse() * micro[j].A;
        N = round_matrix(M);
        return max_abs(M - N.cast<double>());
    };
    for (size_t added = 1; added < R; ++added) {
        size_t next = R;
        for (size_t j = 0; j < R; ++j)
            if (!in_tree[j] && best[j] <= link && (next == R || best[j] < best[next])) next = j;
        if (next == R) {
            std::ostringstream os;
            os << "anchor link graph disconnected at link radius " << link << "; unreachable anchors include ";
            for (size_t j = 0; j < R; ++j)
                if (!in_tree[j]) {
                    os << anchor_text(anchors[j]);
                    break;
                }
            fail(ErrorKind::ChainBroken, os.str());
        }
        Mat2i N;
        const double d = matching(parent[next], next, N);
        const int det = N.determinant();
        if (d >= opt.align_threshold || (det != 1 && det != -1)) {
            std::ostringstream os;
            os << "no unimodular integer matching within " << opt.align_threshold << " between anchors "
               << anchor_text(anchors[parent[next]]) << " and " << anchor_text(anchors[next]) << " (deviation " << d
               << ")";
            fail(ErrorKind::AlignmentAmbiguity, os.str());
        }
        frames[next] = frames[parent[next]] * N;
        dev[next] = d;
        in_tree[next] = true;
        for (size_t j = 0; j < R; ++j) {
            if (in_tree[j]) continue;
            const double dist = (anchors[j] - anchors[next]).norm();
            if (dist < best[j]) {
                best[j] = dist;
                parent[j] = next;
            }
        }
    }
    // every other short link must agree with the tree
    for (size_t i = 0; i < R; ++i)
        for (size_t j = i + 1; j < R; ++j) {
            if ((anchors[i] - anchors[j]).norm() > link) continue;
            Mat2i N;
            if (matching(i, j, N) >= opt.align_threshold) continue;
            if (frames[i] * N != frames[j])
                fail(ErrorKind::AlignmentAmbiguity, "two distinct integer matchings reach anchor " +
                                                        anchor_text(anchors[j]));
        }
    pc.frames = frames;
    pc.align_deviation = dev;

    // leading term: polynomial plus one free translation per non-reference
    // rectangle, so only the slopes inside rectangles carry information
    pc.origin = anchors[ref];
    double ext = 0.0;
    for (const Vec2& a : anchors) ext = std::max(ext, (a - pc.origin).norm());
    pc.scale = ext + std::sqrt(2.0) * w;
    const auto mono = monomials(opt.degree);
    const long nm = static_cast<long>(mono.size());
    const long cols = nm + static_cast<long>(R) - 1;
    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(cols, cols);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(cols, 2);
    Eigen::VectorXd row(cols);
    for (size_t i = 0; i < R; ++i) {
        const MicroChart& mc = micro[i];
        const double wgt = 1.0 / static_cast<double>(mc.labels.size());
        for (size_t p = 0; p < mc.labels.size(); ++p) {
            const Vec2 x = (mc.positions[p] - pc.origin) / pc.scale;
            row.setZero();
            row.head(nm) = basis_values(mono, x.x(), x.y());
            if (i != ref) row[nm + static_cast<long>(i < ref ? i : i - 1)] = 1.0;
            const Vec2 y = h * (frames[i] * mc.labels[p]).cast<double>();
            N.selfadjointView<Eigen::Lower>().rankUpdate(row, wgt);
            rhs += wgt * row * y.transpose();
        }
    }
    N.triangularView<Eigen::StrictlyUpper>() = N.transpose().triangularView<Eigen::StrictlyUpper>();
    for (long c = 0; c < nm; ++c) N(c, c) += opt.ridge;
    const Eigen::MatrixXd sol = N.ldlt().solve(rhs);
    pc.coefficients = sol.topRows(nm).transpose();
    pc.offsets.assign(R, Vec2::Zero());
    for (size_t i = 0; i < R; ++i)
        if (i != ref) pc.offsets[i] = sol.row(nm + static_cast<long>(i < ref ? i : i - 1)).transpose();
    pc.domain_radius = std::max(std::sqrt(2.0) * w, 0.5 * link);

    int sign = 0;
    for (const Vec2& a : anchors) {
        const double det = pc.differential(a).determinant();
        const int s = det > 0 ? 1 : (det < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign))
            fail(ErrorKind::LeadingTermDegenerate,
                 "fitted leading term changes orientation near anchor " + anchor_text(a));
        sign = s;
    }
    return pc;
}

std::vector<MicroChart> fit_micro_charts(const SpectrumCloud& cloud, const std::vector<Vec2>& anchors,
                                         const PseudoChartOptions& opt) {
    const long R = static_cast<long>(anchors.size());
    std::vector<MicroChart> micro(anchors.size());
    std::vector<std::exception_ptr> errors(anchors.size());
    auto work = [&](long i) {
        const Vec2& a = anchors[static_cast<size_t>(i)];
        try {
            const GoodRectangle rect = good_rectangle(a, cloud.eps, cloud.h, cloud.delta, opt.C);
            micro[static_cast<size_t>(i)] = fit_micro_chart(cloud, rect, opt.fit);
        } catch (const Error& e) {
            errors[static_cast<size_t>(i)] = std::make_exception_ptr(
                Error(e.kind(), "rectangle at anchor " + anchor_text(a) + ": " + e.detail()));
        } catch (...) {
            errors[static_cast<size_t>(i)] = std::current_exception();
        }
    };
    if (opt.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < R; ++i) work(i);
    } else {
        for (long i = 0; i < R; ++i) work(i);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return micro;
}

PseudoChart assemble_pseudo_chart(const SpectrumCloud& cloud, const std::vector<Vec2>& anchors,
                                  const PseudoChartOptions& opt) {
    return assemble_from_micro_charts(fit_micro_charts(cloud, anchors, opt), anchors, cloud.h, cloud.eps,
                                      cloud.delta, opt);
}

}  // namespace specmono
