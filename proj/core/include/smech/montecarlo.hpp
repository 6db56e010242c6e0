#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smech/operators.hpp"

namespace smech {

// One jump of the lifted process. `step` is the spatial displacement along
// `axis` in lattice units (0 for a pure winding jump); `winding_step` is the
// unreduced change of n.
struct JumpEvent {
    double time = 0.0;
    SiteIndex site = 0;
    int winding = 0;            // after the jump, mod 4
    std::int64_t net_winding = 0; // after the jump, unreduced
    int axis = 0;
    int step = 0;
    int winding_step = 0;
};

struct GridSnapshot {
    SiteIndex site = 0;
    Vector3 displacement{};  // unwrapped, physical units, relative to the start
    std::int64_t net_winding = 0;
};

struct PathSample {
    SiteIndex start_site = 0;
    int start_winding = 0;
    double t = 0.0;
    std::vector<JumpEvent> events;

    SiteIndex final_site() const noexcept { return events.empty() ? start_site : events.back().site; }
    int final_winding() const noexcept { return events.empty() ? start_winding : events.back().winding; }
    std::int64_t net_winding() const noexcept { return events.empty() ? 0 : events.back().net_winding; }

    // State at times j * dt for j = 0..floor(t/dt): last position at or before each grid time.
    std::vector<GridSnapshot> grid_snapshots(const LatticeSpec& lattice, double dt) const;
};

// Jump list of the lifted process, one entry per elementary event. Rates are
// translation invariant in the winding, so the table is indexed by site only.
class EventTable {
public:
    struct Event {
        SiteIndex target = 0;
        int axis = 0;
        int step = 0;
        int winding_step = 0;
        double rate = 0.0;
    };

    explicit EventTable(const ModelSpec& model);

    std::span<const Event> events(SiteIndex site) const;
    double exit_rate(SiteIndex site) const { return exit_rate_[static_cast<std::size_t>(site)]; }
    SiteIndex num_sites() const noexcept { return static_cast<SiteIndex>(exit_rate_.size()); }

    // Re-assembles the generator from the table (for cross-checks).
    SparseGenerator as_generator() const;

private:
    std::vector<Event> events_;
    std::vector<std::size_t> offsets_;
    std::vector<double> exit_rate_;
};

// Stream for path `index` under master seed `seed`.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept;

PathSample sample_path(const ModelSpec& model, SiteIndex start_site, double t, std::uint64_t seed,
                       std::uint64_t path_index = 0);

// Empirical distribution of the final (site, winding class).
struct KernelEstimate {
    SiteIndex start_site = 0;
    double t = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> counts;  // index 4 * site + winding

    double probability(SiteIndex site, int winding) const;
    // Binomial standard error sqrt(p (1 - p) / N) from the estimate.
    double standard_error(SiteIndex site, int winding) const;
    Eigen::VectorXd probabilities() const;

    // Count addition; both estimates must share start and t.
    KernelEstimate& merge(const KernelEstimate& other);
    bool operator==(const KernelEstimate&) const = default;
};

struct SamplingOptions {
    std::uint64_t first_path = 0;  // paths first_path .. first_path + N - 1
    unsigned threads = 0;          // 0: hardware concurrency
};

KernelEstimate estimate_lifted_kernel(const ModelSpec& model, SiteIndex start_site, double t,
                                      std::uint64_t paths, std::uint64_t seed,
                                      const SamplingOptions& options = {});

// Phase-weighted estimate of the row e^{itH/hbar}(start, .).
struct QuantumKernelEstimate {
    Eigen::VectorXcd mean;
    Eigen::VectorXd real_stderr;
    Eigen::VectorXd imag_stderr;
    Complex c0;
    double amplification = 1.0;  // |e^{c0 t}|
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    double t = 0.0;
};

QuantumKernelEstimate phase_weighted_estimate(const KernelEstimate& lifted, Complex c0);
QuantumKernelEstimate estimate_quantum_kernel(const ModelSpec& model, SiteIndex start_site, double t,
                                              std::uint64_t paths, std::uint64_t seed,
                                              double exponent_cap = 40.0,
                                              const SamplingOptions& options = {});

struct Statistic {
    double mean = 0.0;
    double std_error = 0.0;
};

// E[n_t - n_0] / t with unreduced windings.
Statistic winding_drift_statistic(const ModelSpec& model, SiteIndex start_site, double t,
                                  std::uint64_t paths, std::uint64_t seed,
                                  const SamplingOptions& options = {});

// Generator-exact (1/t) int_0^t E[drift(x_s)] ds from the base occupation.
double expected_winding_drift(const ModelSpec& model, SiteIndex start_site, double t);

// Regularised action on the dt = m a^2 / hbar grid.
struct ActionReport {
    Statistic action_per_step;   // (1/hbar) E[Delta S] per grid step
    Statistic winding_per_step;  // E[n_{t+dt} - n_t] per grid step
    double ratio = 0.0;          // action_per_step / winding_per_step
    int steps = 0;
    std::uint64_t paths = 0;
};

// Throws InvalidArgument unless t is an integer multiple of the model's dt.
ActionReport action_statistic(const ModelSpec& model, SiteIndex start_site, double t,
                              std::uint64_t paths, std::uint64_t seed,
                              const SamplingOptions& options = {});

// CSV cells: site, winding, count, prob, stderr.
void write_csv(std::ostream& out, const KernelEstimate& estimate, const std::string& provenance = {});

}  // namespace smech
