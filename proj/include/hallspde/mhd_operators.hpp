#pragma once

#include "hallspde/spectral_space.hpp"

namespace hallspde {

/// Physical constants of the Hall-MHD system.
struct PhysParams {
    double nu1 = 1.0;       ///< kinematic viscosity
    double nu2 = 1.0;       ///< resistivity
    double hartmann = 1.0;  ///< Hartmann number s
    double hall = 1.0;      ///< Hall parameter; 0 recovers plain MHD

    void validate() const;
};

/// Riesz representative of the Stokes-type operator: nu1 |k|^2 u, nu2 |k|^2 B.
State stokes_riesz(const State& state, const PhysParams& params, CutoffLevel level);

/// Mode-wise integrating factor exp(-nu |k|^2 dt) per component.
State stokes_propagate(const State& state, const PhysParams& params, double dt);

/// b(u, w, v) = sum_x ((u . grad) w) . v, dealiased.
double trilinear_b(const SpectralField& u, const SpectralField& w, const SpectralField& v);

/// b(u1,u2,u3) - b(B1,B2,u3) + b(u1,B2,B3) - b(B1,u2,B3).
double form_mhd(const State& phi1, const State& phi2, const State& phi3);

/// hall(u, w, v) = -sum_x (u x curl w) . curl v.
double form_hall(const SpectralField& u, const SpectralField& w, const SpectralField& v);

/// hall(B1, B2, B3): the Hall form lifted to states.
double form_thall(const State& phi1, const State& phi2, const State& phi3);

/// P_n Leray of ((u.grad)u - s (B.grad)B, (u.grad)B - (B.grad)u).
/// Enters the evolution with a minus sign. Requires a solenoidal state in H_n.
State mhd_riesz(const State& state, const PhysParams& params, CutoffLevel level);

/// (0, P_n Leray of eps curl[(curl B) x B]). Requires state in H_n.
State hall_riesz(const State& state, const PhysParams& params, CutoffLevel level);

/// Both nonlinear representatives from one set of padded transforms.
struct NonlinearTerms {
    State mhd;
    State hall;
    /// max_x |u(x)| on the padded grid; feeds the CFL advisory.
    double max_speed = 0.0;
};

NonlinearTerms nonlinear_riesz(const State& state, const PhysParams& params, CutoffLevel level);

/// (sum_k (1+|k|^2)^s |coefficient|^2)^{1/2} over both components; s may be negative.
double dual_norm(const State& state, double s);

} // namespace hallspde
