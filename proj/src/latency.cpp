#include "gridsim/latency.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gridsim {

namespace {

std::int64_t narrow(__int128 v) {
    if (v > (__int128)INT64_MAX || v < (__int128)INT64_MIN) {
        throw InvalidParameter("rational", "value outside 64-bit range after reduction");
    }
    return (std::int64_t)v;
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

Rational Rational::checked(__int128 n, __int128 d) {
    if (d == 0) throw InvalidParameter("rational", "zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const __int128 g = n == 0 ? d : gcd128(n, d);
    Rational r;
    r.num = narrow(n / g);
    r.den = narrow(d / g);
    return r;
}

Rational::Rational(std::int64_t n, std::int64_t d) { *this = checked(n, d); }

Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw InvalidParameter("rational", "division by zero");
    return Rational::checked((__int128)a.num * b.den, (__int128)a.den * b.num);
}

double t_recursive_doubling(std::int64_t p, double n_bytes, double alpha, double beta,
                            double gamma) {
    if (p < 2 || (p & (p - 1)) != 0) {
        throw InvalidParameter("p", "recursive doubling needs a power-of-two participant count");
    }
    const double lg = std::log2(double(p));
    return lg * alpha + n_bytes * lg * beta + n_bytes * lg * gamma;
}

double t_rabenseifner(std::int64_t p, double n_bytes, double alpha, double beta, double gamma) {
    if (p < 2) throw InvalidParameter("p", "needs >= 2 participants");
    const double lg = std::log2(double(p));
    const double frac = double(p - 1) / double(p);
    return 2.0 * lg * alpha + 2.0 * frac * n_bytes * beta + frac * n_bytes * gamma;
}

double t_ring(std::int64_t p, double n_bytes, double alpha, double beta) {
    if (p < 2) throw InvalidParameter("p", "needs >= 2 participants");
    const double frac = double(p - 1) / double(p);
    return 2.0 * double(p - 1) * alpha + 2.0 * frac * n_bytes * beta;
}

Rational GridLatencyParams::m_p() const {
    if (p < 1) throw InvalidParameter("P", "node count must be >= 1");
    const auto side = (std::int64_t)std::llround(std::sqrt(double(p)));
    if (side * side != p) {
        throw InvalidParameter("P", "node count must be a perfect square");
    }
    return c_w * Rational(side) * t_edge;
}

Overheads derive_overheads(const ClusterLatencyParams& cp) {
    if (cp.n_participants < 2) {
        throw InvalidParameter("N", "needs >= 2 participants");
    }
    if (cp.alpha < 0.0) throw InvalidParameter("alpha", "must be >= 0");
    if (cp.beta < 0.0) throw InvalidParameter("beta", "must be >= 0");
    if (cp.gamma < 0.0) throw InvalidParameter("gamma", "must be >= 0");
    if (!(cp.m0 > 0.0)) throw InvalidParameter("m0", "message floor must be > 0");
    Overheads o;
    o.a_n = (double(cp.n_participants - 1) / double(cp.n_participants)) * cp.m0 * cp.beta;
    o.b_n = std::log2(double(cp.n_participants)) * cp.alpha;
    return o;
}

RatioCurve ratio_curve(Rational c1, Rational c2, Rational ab_sum, Rational m_p,
                       const std::vector<Rational>& xs) {
    if (ab_sum < Rational(0)) throw InvalidParameter("ab_sum", "overheads must be >= 0");
    if (c2 < Rational(0)) throw InvalidParameter("c2", "must be >= 0");
    if (m_p <= Rational(0)) throw InvalidParameter("m_p", "must be > 0");
    RatioCurve curve;
    for (const Rational& x : xs) {
        if (x < Rational(1)) {
            throw InvalidParameter("x", "sparsity variable 1/f_act must be >= 1");
        }
        const Rational denom = c1 + m_p * x;
        if (denom <= Rational(0)) {
            throw InvalidParameter("c1", "grid latency must be positive at sampled x");
        }
        curve.samples.push_back({x, (c2 + ab_sum * x) / denom});
    }
    curve.limit = ab_sum / m_p;
    curve.monotone = ab_sum * c1 > m_p * c2;
    return curve;
}

double ratio_at(double c1, double c2, double ab_sum, double m_p, double x) {
    return (c2 + ab_sum * x) / (c1 + m_p * x);
}

std::string RatioCurve::to_csv() const {
    std::ostringstream out;
    out << "x,R\n";
    out.precision(17);
    for (const RatioSample& s : samples) {
        out << s.x.to_double() << ',' << s.r.to_double() << '\n';
    }
    return out.str();
}

DivergenceTable divergence_experiment(const std::vector<std::int64_t>& n_list, double f_act,
                                      double c1, double m_p, ClusterLatencyParams cp) {
    if (!(f_act > 0.0 && f_act <= 1.0)) {
        throw InvalidParameter("f_act", "must lie in (0,1]");
    }
    if (!(m_p > 0.0)) throw InvalidParameter("m_p", "must be > 0");

    DivergenceTable table;
    const double t_grid = c1 * f_act + m_p;
    for (const std::int64_t n : n_list) {
        if (n < 2) throw InvalidParameter("N", "participant counts must be >= 2");
        cp.n_participants = n;
        const Overheads o = derive_overheads(cp);
        DivergenceRow row;
        row.n_participants = n;
        row.t_cluster = cp.c2 * f_act + o.a_n + o.b_n;
        row.t_grid = t_grid;
        row.ratio = row.t_cluster / t_grid;
        row.ratio_over_log2n = row.ratio / std::log2(double(n));
        table.rows.push_back(row);
    }

    table.diverges = cp.alpha > 0.0;
    const std::size_t half = table.rows.size() / 2;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = half; i < table.rows.size(); ++i) {
        const double v = table.rows[i].ratio_over_log2n;
        if (i == half || v < lo) lo = v;
        if (i == half || v > hi) hi = v;
    }
    if (hi > 0.0) table.tail_rel_spread = (hi - lo) / hi;

    // Ordinary least squares of ratio against log2 N.
    if (table.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        const double m = double(table.rows.size());
        for (const DivergenceRow& r : table.rows) {
            const double x = std::log2(double(r.n_participants));
            const double y = r.ratio;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / m;
        double ss_res = 0.0;
        for (const DivergenceRow& r : table.rows) {
            const double x = std::log2(double(r.n_participants));
            const double resid = r.ratio - (slope * x + intercept);
            ss_res += resid * resid;
        }
        const double ss_tot = syy - sy * sy / m;
        table.fit_slope = slope;
        table.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return table;
}

std::string DivergenceTable::to_csv() const {
    std::ostringstream out;
    out << "N,T_cluster,T_grid,ratio,ratio_over_log2N\n";
    out.precision(12);
    for (const DivergenceRow& r : rows) {
        out << r.n_participants << ',' << r.t_cluster << ',' << r.t_grid << ',' << r.ratio << ','
            << r.ratio_over_log2n << '\n';
    }
    return out.str();
}

} // namespace gridsim
