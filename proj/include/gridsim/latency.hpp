#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsim/errors.hpp"

namespace gridsim {

// Exact rational on int64 with 128-bit intermediates. Keeps the monotonicity
// criterion's boundary case (A+B)c1 == M_P c2 exactly representable.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {} // NOLINT: implicit by design
    Rational(std::int64_t n, std::int64_t d);

    static Rational checked(__int128 n, __int128 d);

    double to_double() const { return double(num) / double(den); }

    friend Rational operator+(Rational a, Rational b) {
        return checked((__int128)a.num * b.den + (__int128)b.num * a.den,
                       (__int128)a.den * b.den);
    }
    friend Rational operator-(Rational a, Rational b) {
        return checked((__int128)a.num * b.den - (__int128)b.num * a.den,
                       (__int128)a.den * b.den);
    }
    friend Rational operator*(Rational a, Rational b) {
        return checked((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend Rational operator/(Rational a, Rational b);

    friend bool operator==(Rational a, Rational b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(Rational a, Rational b) { return !(a == b); }
    friend bool operator<(Rational a, Rational b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator<=(Rational a, Rational b) { return !(b < a); }
    friend bool operator>=(Rational a, Rational b) { return !(a < b); }
};

// --- Collective cost formulas (alpha-beta-gamma model) ----------------------

// log2(p)*alpha + n*log2(p)*beta + n*log2(p)*gamma; p must be a power of two.
double t_recursive_doubling(std::int64_t p, double n_bytes, double alpha, double beta,
                            double gamma);

// 2*log2(p)*alpha + 2*((p-1)/p)*n*beta + ((p-1)/p)*n*gamma.
double t_rabenseifner(std::int64_t p, double n_bytes, double alpha, double beta, double gamma);

// 2*(p-1)*alpha + 2*((p-1)/p)*n*beta.
double t_ring(std::int64_t p, double n_bytes, double alpha, double beta);

// --- Ratio curve R(x) = (c2 + (A+B)x) / (c1 + M_P x) ------------------------

struct GridLatencyParams {
    Rational c1{0};
    Rational c_w{1};
    Rational t_edge{1};
    std::int64_t p = 1; // node count, must be a perfect square

    // M_P = c_w * sqrt(P) * t_edge, recomputed on every call.
    Rational m_p() const;
};

struct ClusterLatencyParams {
    double alpha = 0.0; // startup seconds per collective hop
    double beta = 0.0;  // seconds per byte
    double gamma = 0.0; // seconds per byte reduced
    std::int64_t n_participants = 2;
    double m0 = 1.0; // message-size floor, bytes
    double c2 = 0.0;
};

// f_act-independent overheads derived from the composite collective form:
// A = ((N-1)/N) * m0 * beta, B = log2(N) * alpha.
struct Overheads {
    double a_n = 0.0;
    double b_n = 0.0;
};
Overheads derive_overheads(const ClusterLatencyParams& cp);

struct RatioSample {
    Rational x;
    Rational r;
};

struct RatioCurve {
    std::vector<RatioSample> samples;
    Rational limit{0};    // (A+B) / M_P
    bool monotone = false; // criterion: (A+B)*c1 > M_P*c2

    std::string to_csv() const;
};

// Exact rational evaluation of R over the sample grid. Pre: every x >= 1,
// overheads >= 0, c1 + M_P*x > 0.
RatioCurve ratio_curve(Rational c1, Rational c2, Rational ab_sum, Rational m_p,
                       const std::vector<Rational>& xs);

// Convenience double evaluation for large x (limit checks).
double ratio_at(double c1, double c2, double ab_sum, double m_p, double x);

// --- Divergence in N ---------------------------------------------------------

struct DivergenceRow {
    std::int64_t n_participants = 0;
    double t_cluster = 0.0;
    double t_grid = 0.0;
    double ratio = 0.0;
    double ratio_over_log2n = 0.0;
};

struct DivergenceTable {
    std::vector<DivergenceRow> rows;
    bool diverges = false;        // requires alpha > 0
    double tail_rel_spread = 0.0; // of ratio/log2 N over the last half
    double fit_slope = 0.0;       // ratio vs log2 N
    double fit_r2 = 0.0;

    std::string to_csv() const;
};

// Fixed f_act and P; N sweeps over n_list. The growth order is checked, not
// any absolute constant.
DivergenceTable divergence_experiment(const std::vector<std::int64_t>& n_list, double f_act,
                                      double c1, double m_p, ClusterLatencyParams cp);

} // namespace gridsim
