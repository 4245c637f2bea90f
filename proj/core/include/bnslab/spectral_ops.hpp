#pragma once

#include "bnslab/field.hpp"

namespace bnslab {

/// (sum_cells |f|^p cellvol)^{1/p}, or max |f| for p = inf; |.| is the Euclidean/Frobenius modulus.
double lp_norm(const SpectralField& f, double p);
double lp_norm(const PhysicalField& f, double p);

/// L^2 norm evaluated on the coefficient side: sqrt(L^3 sum |u_k|^2).
double plancherel_l2(const SpectralField& f);
/// L^2(box) inner product evaluated on the coefficient side, summed over components.
double inner_product(const SpectralField& a, const SpectralField& b);
/// ||a - b||_2 / ||b||_2 on the coefficient side (absolute when b = 0).
double relative_l2_error(const SpectralField& a, const SpectralField& b);

/// (I - xi xi^T / |xi|^2) per nonzero mode; zero mode unchanged.
SpectralField leray_project(const SpectralField& f);
/// Multiplier exp(-t |xi|^2).
SpectralField heat_apply(const SpectralField& f, double t);

/// Scalar -> vector (d_j f), vector -> tensor ((grad u)_ij = d_j u_i).
SpectralField gradient(const SpectralField& f);
/// Vector -> scalar, tensor -> vector ((div F)_i = sum_j d_j F_ij).
SpectralField divergence(const SpectralField& f);
/// Leray projection of div F for a tensor F.
SpectralField leray_divergence(const SpectralField& F);

/// Zero every mode outside |k_i| <= n/3.
SpectralField dealias(const SpectralField& f);
/// Dealiased (u (x) v)_ij = u_i v_j of two vector fields.
SpectralField tensor_product(const SpectralField& u, const SpectralField& v);
/// Same, from physical samples of the factors.
SpectralField tensor_product(const PhysicalField& u, const PhysicalField& v);

/// a*x + y.
SpectralField axpy(double a, const SpectralField& x, const SpectralField& y);
SpectralField scaled(const SpectralField& f, double a);

/// Pressure q with q_hat = -xi^T (v(x)v - F)^ xi / |xi|^2, zero mean. F may be null.
SpectralField pressure_from(const SpectralField& v, const SpectralField* F);

/// x -> amplitude * f(2x) on the half-size box; coefficients map index for index.
SpectralField rescale_dyadic(const SpectralField& f, double amplitude = 2.0);

}  // namespace bnslab
