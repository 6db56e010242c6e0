#include "smech/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "smech/equivalence.hpp"
#include "smech/error.hpp"
#include "smech/semigroup.hpp"

namespace smech {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Exact CTMC simulation of the lifted process; `on_jump` sees every event.
template <typename OnJump>
void simulate(const EventTable& table, SiteIndex start, double t, std::mt19937_64& rng, OnJump&& on_jump) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    SiteIndex site = start;
    int winding = 0;
    std::int64_t net = 0;
    double now = 0.0;
    for (;;) {
        const double rate = table.exit_rate(site);
        if (rate <= 0.0) return;
        now += -std::log1p(-uniform(rng)) / rate;
        if (now > t) return;
        const auto events = table.events(site);
        double target = uniform(rng) * rate;
        std::size_t k = 0;
        for (; k + 1 < events.size(); ++k) {
            target -= events[k].rate;
            if (target < 0.0) break;
        }
        const auto& e = events[k];
        site = e.target;
        winding = wrap_winding(winding + e.winding_step);
        net += e.winding_step;
        on_jump(JumpEvent{now, site, winding, net, e.axis, e.step, e.winding_step});
    }
}

unsigned worker_count(const SamplingOptions& options, std::uint64_t paths) {
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(paths, 1)));
}

// Runs body(path_index, partial) over [first, first + paths) split across
// workers, then folds the partials with merge(total, partial).
template <typename Partial, typename Body, typename Merge>
Partial parallel_paths(std::uint64_t first, std::uint64_t paths, unsigned workers, Partial init, Body body,
                       Merge merge) {
    std::vector<Partial> partials(workers, init);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = first + w * chunk;
        const std::uint64_t end = std::min(first + paths, begin + chunk);
        auto task = [&, w, begin, end] {
            for (std::uint64_t i = begin; i < end; ++i) body(i, partials[w]);
        };
        if (workers == 1)
            task();
        else
            pool.emplace_back(task);
    }
    for (auto& th : pool) th.join();
    Partial total = init;
    for (auto& p : partials) merge(total, p);
    return total;
}

// Like parallel_paths, but partials are kept per fixed block of paths and
// folded in block order, so floating-point results do not depend on the
// number of workers.
template <typename Partial, typename Body, typename Merge>
Partial ordered_paths(std::uint64_t first, std::uint64_t paths, unsigned workers, Body body, Merge merge) {
    constexpr std::uint64_t kBlock = 1024;
    const std::uint64_t blocks = (paths + kBlock - 1) / kBlock;
    std::vector<Partial> partials(blocks);
    auto task = [&](unsigned w) {
        for (std::uint64_t b = w; b < blocks; b += workers) {
            const std::uint64_t begin = first + b * kBlock;
            const std::uint64_t end = std::min(first + paths, begin + kBlock);
            for (std::uint64_t i = begin; i < end; ++i) body(i, partials[b]);
        }
    };
    if (workers <= 1) {
        task(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(task, w);
        for (auto& th : pool) th.join();
    }
    Partial total{};
    for (const auto& p : partials) merge(total, p);
    return total;
}

void check_path_args(const ModelSpec& model, SiteIndex start, double t) {
    if (start < 0 || start >= model.num_sites()) throw OutOfRange("start site outside the lattice");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and non-negative");
}

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t n = 0;
    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    Statistic statistic(double scale = 1.0) const {
        if (n == 0) return {};
        const double mean = sum / static_cast<double>(n);
        const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / static_cast<double>(n - 1)) : 0.0;
        return {scale * mean, std::abs(scale) * std::sqrt(var / static_cast<double>(n))};
    }
};

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(seed ^ splitmix64(index));
}

EventTable::EventTable(const ModelSpec& model) {
    const auto& lattice = model.lattice();
    const double kappa = model.hop_rate();
    const double alpha = model.vector_coupling();
    const double hbar = model.constants().hbar;
    const auto n = lattice.num_sites();
    offsets_.reserve(static_cast<std::size_t>(n) + 1);
    exit_rate_.reserve(static_cast<std::size_t>(n));
    offsets_.push_back(0);
    auto push = [&](const Event& e, double& total) {
        if (e.rate <= 0.0) return;
        events_.push_back(e);
        total += e.rate;
    };
    for (SiteIndex x = 0; x < n; ++x) {
        double total = 0.0;
        const auto& a = model.fields().vector_potential[static_cast<std::size_t>(x)];
        for (int axis = 0; axis < lattice.dimension(); ++axis) {
            const auto [a_plus, a_minus] = split_vector_potential(a[static_cast<std::size_t>(axis)]);
            const auto forward = lattice.neighbor(x, axis, +1);
            const auto backward = lattice.neighbor(x, axis, -1);
            push({forward, axis, +1, -1, kappa}, total);
            push({backward, axis, -1, -1, kappa}, total);
            push({forward, axis, +1, 0, kappa * alpha * a_minus}, total);
            push({backward, axis, -1, 0, kappa * alpha * a_plus}, total);
        }
        const double v = model.potential(x);
        push({x, 0, 0, +1, model.k0() / hbar + v / (2.0 * hbar)}, total);
        push({x, 0, 0, -1, model.k0() / hbar - v / (2.0 * hbar)}, total);
        offsets_.push_back(events_.size());
        exit_rate_.push_back(total);
    }
}

std::span<const EventTable::Event> EventTable::events(SiteIndex site) const {
    const auto s = static_cast<std::size_t>(site);
    return {events_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
}

SparseGenerator EventTable::as_generator() const {
    const auto n = num_sites();
    std::vector<Eigen::Triplet<double>> t;
    for (SiteIndex x = 0; x < n; ++x)
        for (int w = 0; w < kFiberSize; ++w) {
            const auto s = fiber_state(x, w);
            for (const auto& e : events(x)) t.emplace_back(s, fiber_state(e.target, w + e.winding_step), e.rate);
            t.emplace_back(s, s, -exit_rate(x));
        }
    RealSparse m(static_cast<Eigen::Index>(n) * kFiberSize, static_cast<Eigen::Index>(n) * kFiberSize);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return {std::move(m), StateSpace::LatticeZ4};
}

std::vector<GridSnapshot> PathSample::grid_snapshots(const LatticeSpec& lattice, double dt) const {
    if (!(dt > 0.0)) throw InvalidArgument("grid spacing must be positive");
    const auto steps = static_cast<std::size_t>(std::floor(t / dt * (1.0 + 1e-12)));
    std::vector<GridSnapshot> out;
    out.reserve(steps + 1);
    GridSnapshot current{start_site, {}, 0};
    std::size_t next = 0;
    for (std::size_t j = 0; j <= steps; ++j) {
        const double grid_time = static_cast<double>(j) * dt;
        while (next < events.size() && events[next].time <= grid_time) {
            const auto& e = events[next++];
            current.site = e.site;
            current.displacement[static_cast<std::size_t>(e.axis)] += e.step * lattice.spacing();
            current.net_winding = e.net_winding;
        }
        out.push_back(current);
    }
    return out;
}

PathSample sample_path(const ModelSpec& model, SiteIndex start_site, double t, std::uint64_t seed,
                       std::uint64_t path_index) {
    check_path_args(model, start_site, t);
    const EventTable table(model);
    std::mt19937_64 rng(path_seed(seed, path_index));
    PathSample path{start_site, 0, t, {}};
    simulate(table, start_site, t, rng, [&](const JumpEvent& e) { path.events.push_back(e); });
    return path;
}

double KernelEstimate::probability(SiteIndex site, int winding) const {
    if (paths == 0) return 0.0;
    return static_cast<double>(counts.at(static_cast<std::size_t>(fiber_state(site, winding)))) /
           static_cast<double>(paths);
}

double KernelEstimate::standard_error(SiteIndex site, int winding) const {
    if (paths == 0) return 0.0;
    const double p = probability(site, winding);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(paths));
}

Eigen::VectorXd KernelEstimate::probabilities() const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i)
        p(static_cast<Eigen::Index>(i)) = paths ? static_cast<double>(counts[i]) / static_cast<double>(paths) : 0.0;
    return p;
}

KernelEstimate& KernelEstimate::merge(const KernelEstimate& other) {
    if (other.counts.size() != counts.size() || other.start_site != start_site || other.t != t)
        throw DimensionMismatch("cannot merge kernel estimates of different problems");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    paths += other.paths;
    return *this;
}

KernelEstimate estimate_lifted_kernel(const ModelSpec& model, SiteIndex start_site, double t,
                                      std::uint64_t paths, std::uint64_t seed, const SamplingOptions& options) {
    check_path_args(model, start_site, t);
    if (paths < 1) throw InvalidArgument("at least one path is required");
    const EventTable table(model);
    const auto cells = static_cast<std::size_t>(model.num_sites()) * kFiberSize;
    using Counts = std::vector<std::uint64_t>;
    auto counts = parallel_paths(
        options.first_path, paths, worker_count(options, paths), Counts(cells, 0),
        [&](std::uint64_t i, Counts& partial) {
            std::mt19937_64 rng(path_seed(seed, i));
            SiteIndex site = start_site;
            int winding = 0;
            simulate(table, start_site, t, rng, [&](const JumpEvent& e) {
                site = e.site;
                winding = e.winding;
            });
            ++partial[static_cast<std::size_t>(fiber_state(site, winding))];
        },
        [](Counts& total, const Counts& part) {
            for (std::size_t k = 0; k < total.size(); ++k) total[k] += part[k];
        });
    return {start_site, t, paths, seed, std::move(counts)};
}

QuantumKernelEstimate phase_weighted_estimate(const KernelEstimate& lifted, Complex c0) {
    const auto n_sites = static_cast<Eigen::Index>(lifted.counts.size() / kFiberSize);
    const Complex factor = std::exp(c0 * lifted.t);
    QuantumKernelEstimate q;
    q.mean = Eigen::VectorXcd::Zero(n_sites);
    q.real_stderr = Eigen::VectorXd::Zero(n_sites);
    q.imag_stderr = Eigen::VectorXd::Zero(n_sites);
    q.c0 = c0;
    q.amplification = std::abs(factor);
    q.paths = lifted.paths;
    q.seed = lifted.seed;
    q.t = lifted.t;
    const double n = static_cast<double>(lifted.paths);
    for (Eigen::Index x = 0; x < n_sites; ++x) {
        // Per-path sample Y = e^{c0 t} i^{n_t} 1[x_t = x].
        Complex mean{};
        double re2 = 0.0;
        double im2 = 0.0;
        for (int w = 0; w < kFiberSize; ++w) {
            const double p = lifted.probability(x, w);
            const Complex y = factor * i_power(w);
            mean += p * y;
            re2 += p * y.real() * y.real();
            im2 += p * y.imag() * y.imag();
        }
        q.mean(x) = mean;
        if (n > 1) {
            const double bessel = n / (n - 1.0);
            q.real_stderr(x) = std::sqrt(std::max(0.0, bessel * (re2 - mean.real() * mean.real())) / n);
            q.imag_stderr(x) = std::sqrt(std::max(0.0, bessel * (im2 - mean.imag() * mean.imag())) / n);
        }
    }
    return q;
}

QuantumKernelEstimate estimate_quantum_kernel(const ModelSpec& model, SiteIndex start_site, double t,
                                              std::uint64_t paths, std::uint64_t seed, double exponent_cap,
                                              const SamplingOptions& options) {
    const auto sc = derive_sector_constant(model);
    check_exponent_cap(sc.c0, t, exponent_cap);
    return phase_weighted_estimate(estimate_lifted_kernel(model, start_site, t, paths, seed, options), sc.c0);
}

Statistic winding_drift_statistic(const ModelSpec& model, SiteIndex start_site, double t, std::uint64_t paths,
                                  std::uint64_t seed, const SamplingOptions& options) {
    check_path_args(model, start_site, t);
    if (paths < 1) throw InvalidArgument("at least one path is required");
    if (t == 0.0) return {};
    const EventTable table(model);
    const auto moments = ordered_paths<Moments>(
        options.first_path, paths, worker_count(options, paths),
        [&](std::uint64_t i, Moments& partial) {
            std::mt19937_64 rng(path_seed(seed, i));
            std::int64_t net = 0;
            simulate(table, start_site, t, rng, [&](const JumpEvent& e) { net = e.net_winding; });
            partial.add(static_cast<double>(net));
        },
        [](Moments& total, const Moments& part) { total.merge(part); });
    return moments.statistic(1.0 / t);
}

double expected_winding_drift(const ModelSpec& model, SiteIndex start_site, double t) {
    check_path_args(model, start_site, t);
    const auto lifted = build_lifted_generator(model);
    const auto n = static_cast<Eigen::Index>(model.num_sites());
    Eigen::VectorXd drift(n);
    for (Eigen::Index x = 0; x < n; ++x) drift(x) = winding_drift(lifted, x);
    if (t == 0.0) return drift(start_site);

    // int_0^t e^{s B^T} e_start ds is the top-right block of exp(t [[B^T, e], [0, 0]]).
    const Eigen::MatrixXd base = Eigen::MatrixXd(build_base_generator(model).matrix);
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + 1, n + 1);
    augmented.topLeftCorner(n, n) = base.transpose();
    augmented(start_site, n) = 1.0;
    const Eigen::MatrixXd e = expm_dense(augmented, t);
    const Eigen::VectorXd occupation = e.topRightCorner(n, 1);
    return occupation.dot(drift) / t;
}

ActionReport action_statistic(const ModelSpec& model, SiteIndex start_site, double t, std::uint64_t paths,
                              std::uint64_t seed, const SamplingOptions& options) {
    check_path_args(model, start_site, t);
    if (paths < 1) throw InvalidArgument("at least one path is required");
    const double dt = model.dt();
    const double ratio = t / dt;
    const auto steps = static_cast<int>(std::llround(ratio));
    if (steps < 1 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument("t must be a positive integer multiple of dt = m a^2 / hbar");

    const auto& lattice = model.lattice();
    const auto& k = model.constants();
    const double drift_coef = k.charge / (k.light_speed * k.mass);
    const EventTable table(model);

    struct Acc {
        Moments action;
        Moments winding;
    };
    const auto acc = ordered_paths<Acc>(
        options.first_path, paths, worker_count(options, paths),
        [&](std::uint64_t i, Acc& partial) {
            std::mt19937_64 rng(path_seed(seed, i));
            std::vector<JumpEvent> events;
            simulate(table, start_site, t, rng, [&](const JumpEvent& e) { events.push_back(e); });

            double total = 0.0;
            SiteIndex site = start_site;
            Vector3 position{};
            std::int64_t net = 0;
            std::size_t next = 0;
            double now = 0.0;
            for (int j = 0; j < steps; ++j) {
                const double end = (j + 1) * dt;
                const SiteIndex site_start = site;
                const Vector3 start_position = position;
                double potential_integral = 0.0;
                while (next < events.size() && events[next].time <= end) {
                    const auto& e = events[next++];
                    potential_integral += model.potential(site) * (e.time - now);
                    now = e.time;
                    site = e.site;
                    position[static_cast<std::size_t>(e.axis)] += e.step * lattice.spacing();
                    net = e.net_winding;
                }
                potential_integral += model.potential(site) * (end - now);
                now = end;

                const auto& a = model.fields().vector_potential[static_cast<std::size_t>(site_start)];
                double kinetic = 0.0;
                for (int axis = 0; axis < lattice.dimension(); ++axis) {
                    const auto ax = static_cast<std::size_t>(axis);
                    const double velocity = (position[ax] - start_position[ax]) / dt + drift_coef * a[ax];
                    kinetic += velocity * velocity;
                }
                total += (0.5 * k.mass * kinetic * dt - potential_integral) / k.hbar;
            }
            partial.action.add(total / steps);
            partial.winding.add(static_cast<double>(net) / steps);
        },
        [](Acc& total, const Acc& part) {
            total.action.merge(part.action);
            total.winding.merge(part.winding);
        });

    ActionReport report;
    report.action_per_step = acc.action.statistic();
    report.winding_per_step = acc.winding.statistic();
    report.ratio = report.winding_per_step.mean != 0.0 ? report.action_per_step.mean / report.winding_per_step.mean
                                                        : 0.0;
    report.steps = steps;
    report.paths = paths;
    return report;
}

void write_csv(std::ostream& out, const KernelEstimate& estimate, const std::string& provenance) {
    out << "# smech-kernel-estimate start=" << estimate.start_site << " t=" << estimate.t
        << " paths=" << estimate.paths << " seed=" << estimate.seed;
    if (!provenance.empty()) out << ' ' << provenance;
    out << "\nsite,winding,count,prob,stderr\n";
    out.precision(17);
    const auto n_sites = static_cast<SiteIndex>(estimate.counts.size() / kFiberSize);
    for (SiteIndex x = 0; x < n_sites; ++x)
        for (int w = 0; w < kFiberSize; ++w)
            out << x << ',' << w << ',' << estimate.counts[static_cast<std::size_t>(fiber_state(x, w))] << ','
                << estimate.probability(x, w) << ',' << estimate.standard_error(x, w) << '\n';
}

}  // namespace smech
