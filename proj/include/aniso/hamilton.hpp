#pragma once

#include "aniso/geometry.hpp"

#include <string>
#include <vector>

namespace aniso {

// Power hamiltonian a = psi_mu (x^{2k} + xi^{2m})^p and its flow.
struct HamiltonianSpec {
    int k = 1;
    int m = 1;
    double p_exp = 1.0;
    double mu = 0.5;

    HamiltonianSpec() = default;
    HamiltonianSpec(int k_, int m_, double p_, double mu_);

    double p_c() const { return 0.5 * (1.0 / k + 1.0 / m); }
    double sigma() const { return static_cast<double>(k) / m; }
    // Supercritical window p_c < p <= p_c + min(1/k, 1/m)/4.
    bool supercritical_admissible() const;
    double energy(const PhasePoint& z) const;   // x^{2k} + xi^{2m}
    double value(const PhasePoint& z) const;    // psi_mu * energy^p
    PhasePoint hamiltonian_field(const PhasePoint& z) const; // (d_xi a, -d_x a)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<double> energy; // a evaluated along the flow
    double max_energy_drift() const; // relative
};

// Closed-form flow for k = m = 1: clockwise rotation by 2p(x^2+xi^2)^{p-1} t.
PhasePoint flow_closed_form(const HamiltonianSpec& h, const PhasePoint& z, double t);

// Rotation law extended through the excision annulus (angular rate from the
// full symbol including psi_mu'); valid at every radius for k = m = 1.
PhasePoint rotation_flow_full(const HamiltonianSpec& h, const PhasePoint& z, double t);

// Classic RK4 with step min(dt_max, T_est/2000).
Trajectory flow_rk4(const HamiltonianSpec& h, const PhasePoint& z, double t, double dt_max);

// Endpoint-only RK4 map with a caller-chosen number of steps per estimated
// period (used for raster transport).
PhasePoint flow_map(const HamiltonianSpec& h, const PhasePoint& z, double t,
                    int steps_per_period = 512);

// Orbit period from the Gamma-function formula.
double period(const HamiltonianSpec& h, const PhasePoint& z);

// Transported region: backward-maps each output cell center with chi_{-t} and
// evaluates the input predicate (normative raster); forward consistency is
// checked separately.
RegionMask transport_region(const HamiltonianSpec& h, const RegionMask& region, double t,
                            int steps_per_period = 512);

struct TransportConsistency {
    int samples = 0;
    int consistent = 0;
    double fraction() const { return samples == 0 ? 1.0 : double(consistent) / samples; }
};

// Forward-maps boundary cells of the input raster and checks each image lands
// within one cell of the backward-built raster.
TransportConsistency transport_consistency(const HamiltonianSpec& h, const RegionMask& region,
                                           double t, const RegionMask& transported,
                                           int steps_per_period = 512);

struct HomogeneityReport {
    double max_rel_deviation = 0.0; // of a_0(lambda x, lambda^sigma xi) = lambda^{1+sigma} a_0
    double rho_lo = 0.5;
    double rho_hi = 0.0; // 1 - 2 max(k,m)(p - p_c)
    bool rho_interval_nonempty = false;
};

HomogeneityReport homogeneity_check(const HamiltonianSpec& h, int samples, unsigned seed = 12345);

void save_trajectory_csv(const Trajectory& tr, const std::string& path);

} // namespace aniso
