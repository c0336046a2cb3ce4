#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "grf/geometry.hpp"
#include "grf/homogeneous.hpp"
#include "grf/lattice.hpp"
#include "grf/rng.hpp"
#include "grf/variation.hpp"

namespace grf {

struct LambdaResult {
    double lambda = 0.0;
    Tensor f;
    double normalization_residual = 0.0;  // | int e^{-f} dV - 1 |
};

/// Schrodinger potential R - |H|^2 / 12.
template <class S>
Tensor schrodinger_potential(const S& s, const CurvaturePack& P) {
    Tensor V = P.Rsc;
    V.axpy(-1.0 / 12.0, P.normH2);
    return V;
}

/// Invariant potentials are constant, so the minimizer is the constant
/// log-volume and lambda is the potential itself.
inline LambdaResult lambda_min(const HomogState& s) {
    CurvaturePack P = curvature(s);
    LambdaResult r;
    r.lambda = schrodinger_potential(s, P).a[0];
    r.f = Tensor(s.n(), 0, 1);
    r.f.a[0] = std::log(s.volume);
    r.normalization_residual = std::abs(std::exp(-r.f.a[0]) * s.volume - 1.0);
    return r;
}

inline HomogState with_minimizer(const HomogState& s) {
    HomogState out = s;
    out.fval = std::log(s.volume);
    return out;
}

/// Lattice route: ground state of -4 Lap + R - |H|^2/12, f = -2 ln u.
inline LambdaResult lambda_min(const LatticeState& s) {
    CurvaturePack P = curvature(s);
    GroundState gs = ground_state(s, schrodinger_potential(s, P));
    LambdaResult r;
    r.lambda = gs.lambda;
    r.f = gs.f;
    Tensor emf(s.n(), 0, s.pts());
    for (std::size_t p = 0; p < emf.pts; ++p) emf.at(p, 0) = std::exp(-r.f.at(p, 0));
    r.normalization_residual = std::abs(s.integrate_raw(emf) - 1.0);
    return r;
}

inline LatticeState with_minimizer(const LatticeState& s) { return s.with_f(lambda_min(s).f); }

template <class S>
double lambda_of(const S& s) {
    return lambda_min(s).lambda;
}

/// Generalized Einstein-Hilbert functional at the state's own f:
/// int (R - |H|^2/12 + |grad f|^2) e^{-f} dV.
template <class S>
double F_value(const S& s) {
    CurvaturePack P = curvature(s);
    Tensor integrand = schrodinger_potential(s, P);
    Tensor df = s.grad_f();
    integrand += inner_pt(s, df, df);
    return s.integrate(integrand);
}

/// State moved along the variation gamma = h - K: g += t*sym(gamma),
/// b -= t*skew(gamma).
template <class S>
S perturb(const S& s, const Tensor& gamma, double t) {
    Tensor g = s.g;
    g.axpy(t, sym2(gamma));
    Tensor b = s.b;
    b.axpy(-t, skew2(gamma));
    return s.with_gb(std::move(g), std::move(b));
}

/// First variation of lambda along gamma: -<gamma, Rc^{H,f}>_f with f the
/// recomputed minimizer.
template <class S>
double first_variation(const S& s, const Tensor& gamma) {
    S sm = with_minimizer(s);
    return -inner_f(sm, gamma, rc_Hf(sm));
}

/// Pointwise residual of the eigenvalue identity
/// lambda = R - |H|^2/12 + 2 Delta f - |grad f|^2 for the returned (lambda, f).
template <class S>
double lambda_identity_residual(const S& s) {
    S sm = with_minimizer(s);
    LambdaResult lr = lambda_min(s);
    CurvaturePack P = curvature(sm);
    Tensor rhs = schrodinger_potential(sm, P);
    Tensor df = sm.grad_f();
    rhs.axpy(-1.0, inner_pt(sm, df, df));
    rhs.axpy(2.0, laplace_f(sm, sm.f_field()) + inner_pt(sm, df, df));  // Delta f = Delta_f f + |grad f|^2
    double m = 0.0;
    for (std::size_t p = 0; p < rhs.pts; ++p) m = std::max(m, std::abs(rhs.at(p, 0) - lr.lambda));
    return m;
}

struct SampleRow {
    int id = 0;
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

template <class S>
Tensor random_direction(const S& s, std::mt19937_64& eng);

inline Tensor random_direction(const HomogState& s, std::mt19937_64& eng) {
    return random_invariant(s.n(), 2, Symmetry::none, eng);
}

inline Tensor random_direction(const LatticeState& s, std::mt19937_64& eng) {
    return make_smooth_tensor(s.n(), 2, Symmetry::none, s.grid().L, eng).sample(*s.tab);
}

/// Perturbations of norm <= radius around a verified soliton; emits the two
/// sides of the Lojasiewicz bound |lambda - lambda0|^{1/2} <= C |Rc^{H,f}|_{L^2}.
template <class S>
std::vector<SampleRow> lojasiewicz_sample(const S& sol, double radius, int count, std::uint64_t seed,
                                          bool slice = false) {
    require_soliton(sol, 1e-8);
    const double lam0 = lambda_of(sol);
    std::mt19937_64 eng(seed);
    std::vector<SampleRow> rows;
    for (int i = 0; i < count; ++i) {
        Tensor gamma = random_direction(sol, eng);
        if (slice) gamma = project_ker_div_bar(sol, gamma);
        double nrm = norm_f(sol, gamma);
        if (nrm < 1e-14) continue;
        gamma *= radius / nrm;
        S pert = with_minimizer(perturb(sol, gamma, 1.0));
        SampleRow row;
        row.id = i;
        row.lhs = std::sqrt(std::abs(lambda_of(pert) - lam0));
        row.rhs = norm_f(pert, rc_Hf(pert));
        row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
        rows.push_back(row);
    }
    return rows;
}

/// Same protocol for |Rc^H| <= C |Rc^{H,f}| near a generalized Einstein
/// metric (constant minimizer); refuses other base points.
template <class S>
std::vector<SampleRow> transversality_sample(const S& base, double radius, int count, std::uint64_t seed,
                                             bool slice = false) {
    require_soliton(base, 1e-8);
    S bm = with_minimizer(base);
    Tensor df = bm.grad_f();
    double dfn = norm_f(bm, df);
    if (dfn > 1e-8)
        throw std::invalid_argument("transversality: base minimizer is not constant, |grad f| = " +
                                    std::to_string(dfn));
    std::mt19937_64 eng(seed);
    std::vector<SampleRow> rows;
    for (int i = 0; i < count; ++i) {
        Tensor gamma = random_direction(base, eng);
        if (slice) gamma = project_ker_div_bar(base, gamma);
        double nrm = norm_f(base, gamma);
        if (nrm < 1e-14) continue;
        gamma *= radius / nrm;
        S pert = with_minimizer(perturb(base, gamma, 1.0));
        CurvaturePack P = curvature(pert);
        SampleRow row;
        row.id = i;
        row.lhs = norm_f(pert, rc_H(pert, P));
        row.rhs = norm_f(pert, rc_Hf(pert, P));
        row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
        rows.push_back(row);
    }
    return rows;
}

/// Second derivative of lambda along gamma by central differences.
template <class S>
double lambda_second_difference(const S& s, const Tensor& gamma, double t) {
    double lp = lambda_of(perturb(s, gamma, t));
    double lm = lambda_of(perturb(s, gamma, -t));
    double l0 = lambda_of(s);
    return (lp - 2.0 * l0 + lm) / (t * t);
}

}  // namespace grf
