#include "smech/semigroup.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "smech/error.hpp"

namespace smech {

namespace {

// Higham (2005) scaling-and-squaring with diagonal Pade approximants.
constexpr std::array<double, 14> kPade13 = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                            1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                            670442572800.0,      33522128640.0,       1323241920.0,
                                            40840800.0,          960960.0,            16380.0,
                                            182.0,               1.0};
constexpr std::array<double, 4> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

template <typename Matrix>
double one_norm(const Matrix& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Matrix>
Matrix pade_low(const Matrix& a, int degree) {
    static const std::array<std::vector<double>, 4> coeffs = {
        std::vector<double>{120.0, 60.0, 12.0, 1.0},
        std::vector<double>{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0},
        std::vector<double>{17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0},
        std::vector<double>{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                            2162160.0, 110880.0, 3960.0, 90.0, 1.0}};
    const auto& b = coeffs[static_cast<std::size_t>((degree - 3) / 2)];
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    Matrix power = ident;
    Matrix u_even = Matrix::Zero(n, n);
    Matrix v = Matrix::Zero(n, n);
    for (int k = 0; k <= degree; k += 2) {
        u_even += b[static_cast<std::size_t>(k + 1)] * power;
        v += b[static_cast<std::size_t>(k)] * power;
        power = power * a2;
    }
    const Matrix u = a * u_even;
    return (v - u).partialPivLu().solve(v + u);
}

template <typename Matrix>
Matrix pade13(const Matrix& a) {
    const auto& b = kPade13;
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Matrix u = a * (u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const Matrix v_inner = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    const Matrix v = v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

template <typename Matrix>
Matrix expm_impl(const Matrix& input, double t, const ExpmOptions& options) {
    if (input.rows() != input.cols()) throw DimensionMismatch("matrix exponential needs a square matrix");
    if (input.rows() > options.dense_cap)
        throw DimensionCapExceeded("dense exponential of dimension " + std::to_string(input.rows()) +
                                   " exceeds cap " + std::to_string(options.dense_cap));
    if (!std::isfinite(t)) throw InvalidArgument("time must be finite");
    const auto n = input.rows();
    if (t == 0.0) return Matrix::Identity(n, n);
    const Matrix a = t * input;
    const double norm = one_norm(a);
    if (!std::isfinite(norm)) throw InvalidArgument("matrix has non-finite entries");

    if (options.extra_squarings == 0) {
        for (int i = 0; i < 4; ++i)
            if (norm <= kTheta[static_cast<std::size_t>(i)]) return pade_low(a, 3 + 2 * i);
    }
    int s = norm > kTheta13 ? static_cast<int>(std::ceil(std::log2(norm / kTheta13))) : 0;
    s += options.extra_squarings;
    Matrix result = pade13(Matrix(a / std::ldexp(1.0, s)));
    for (int i = 0; i < s; ++i) result = result * result;
    return result;
}

template <typename Sparse>
void check_action_dims(const Sparse& a, const Eigen::VectorXcd& v) {
    if (a.rows() != a.cols() || a.cols() != v.size())
        throw DimensionMismatch("operator and vector dimensions differ");
}

}  // namespace

Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& a, double t, const ExpmOptions& options) {
    return expm_impl(a, t, options);
}

Eigen::MatrixXcd expm_dense(const Eigen::MatrixXcd& a, double t, const ExpmOptions& options) {
    return expm_impl(a, t, options);
}

FiberKernel expm_dense(const SparseGenerator& gen, double t, const ExpmOptions& options) {
    if (gen.dimension() > options.dense_cap)
        throw DimensionCapExceeded("generator dimension exceeds dense cap");
    return {expm_dense(Eigen::MatrixXd(gen.matrix), t, options), t, "expm:" + to_string(gen.space)};
}

ComplexKernel expm_dense(const ComplexOperator& op, Complex scale, double t, const ExpmOptions& options) {
    if (op.dimension() > options.dense_cap) throw DimensionCapExceeded("operator dimension exceeds dense cap");
    const Eigen::MatrixXcd a = scale * Eigen::MatrixXcd(op.matrix);
    return {expm_dense(a, t, options), t, op.tag == OperatorTag::Hamiltonian ? "expm:hamiltonian" : "expm:sector"};
}

double expm_self_residual(const Eigen::MatrixXcd& a, double t) {
    const Eigen::MatrixXcd base = expm_dense(a, t);
    ExpmOptions refined;
    refined.extra_squarings = 1;
    const Eigen::MatrixXcd check = expm_dense(a, t, refined);
    const double scale = std::max(1.0, check.cwiseAbs().maxCoeff());
    return (base - check).cwiseAbs().maxCoeff() / scale;
}

int poisson_truncation(double mean, double tol) {
    if (mean <= 0.0) return 0;
    // Accumulate weights in log space; cumulative mass is compared against 1 - tol.
    double cumulative = 0.0;
    const double log_mean = std::log(mean);
    for (int k = 0;; ++k) {
        const double log_w = -mean + k * log_mean - std::lgamma(k + 1.0);
        cumulative += std::exp(log_w);
        if (1.0 - cumulative < tol && k >= mean) return k;
        if (k > 100000) return k;
    }
}

FiberKernel uniformize(const SparseGenerator& gen, double t, const UniformizationOptions& options) {
    if (!(options.tol > 0.0)) throw InvalidArgument("uniformization tolerance must be positive");
    if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("time must be finite and non-negative");
    gen.validate(1e-10);
    const auto n = gen.dimension();
    if (n > options.dense_cap) throw DimensionCapExceeded("generator dimension exceeds dense cap");
    if (t == 0.0) return {Eigen::MatrixXd::Identity(n, n), 0.0, "uniformize:" + to_string(gen.space)};

    const double lambda = options.rate_factor * gen.max_abs_diagonal();
    if (lambda == 0.0) return {Eigen::MatrixXd::Identity(n, n), t, "uniformize:" + to_string(gen.space)};

    int halvings = 0;
    double step = t;
    while (lambda * step > options.max_poisson_mean) {
        step *= 0.5;
        ++halvings;
    }
    // Per-step tolerance so the squared result still meets tol.
    const double step_tol = options.tol / std::ldexp(1.0, halvings);

    RealSparse p(n, n);
    p.setIdentity();
    p = p + gen.matrix / lambda;

    const double mean = lambda * step;
    const int terms = poisson_truncation(mean, step_tol);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    const double log_mean = std::log(mean);
    for (int k = 0; k <= terms; ++k) {
        const double w = std::exp(-mean + k * log_mean - std::lgamma(k + 1.0));
        sum += w * power;
        if (k < terms) power = power * p;
    }
    for (int i = 0; i < halvings; ++i) sum = sum * sum;
    return {sum, t, "uniformize:" + to_string(gen.space)};
}

ActionResult expm_action(const ComplexSparse& a, Complex scale, const Eigen::VectorXcd& v, double t,
                         const ActionOptions& options) {
    check_action_dims(a, v);
    ActionResult result{v, 0.0, 0};
    if (t == 0.0 || v.size() == 0) return result;

    double norm = 0.0;
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        double row = 0.0;
        for (ComplexSparse::InnerIterator it(a, c); it; ++it) row += std::abs(it.value());
        norm = std::max(norm, row);
    }
    norm *= std::abs(scale) * std::abs(t);
    const int substeps = std::max(1, static_cast<int>(std::ceil(norm)));
    const Complex h = scale * (t / substeps);
    const double step_tol = options.tol / substeps;

    Eigen::VectorXcd w = v;
    for (int s = 0; s < substeps; ++s) {
        Eigen::VectorXcd term = w;
        Eigen::VectorXcd sum = w;
        const double reference = std::max(w.norm(), 1e-300);
        double last = reference;
        int k = 1;
        for (; k <= options.max_terms; ++k) {
            term = (h / static_cast<double>(k)) * (a * term);
            sum += term;
            const double tn = term.norm();
            // Two consecutive small terms guard against accidental cancellation.
            if (tn <= step_tol * reference && last <= step_tol * reference * 1e3) {
                last = tn;
                break;
            }
            last = tn;
        }
        if (k > options.max_terms)
            throw ConvergenceFailure("Taylor action did not converge", last / reference);
        result.error_estimate += last / reference;
        w = std::move(sum);
    }
    result.value = std::move(w);
    result.substeps = substeps;
    return result;
}

ActionResult expm_action(const SparseGenerator& gen, const Eigen::VectorXcd& v, double t,
                         const ActionOptions& options) {
    const ComplexSparse a = gen.matrix.cast<Complex>();
    return expm_action(a, Complex(1.0, 0.0), v, t, options);
}

namespace {

void write_header(std::ostream& out, const std::string& kind, Eigen::Index rows, double t,
                  const std::string& source, const std::string& provenance) {
    out << "# smech-kernel kind=" << kind << " dimension=" << rows << " t=" << t;
    if (!source.empty()) out << " source=" << source;
    if (!provenance.empty()) out << ' ' << provenance;
    out << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const FiberKernel& kernel, const std::string& provenance) {
    write_header(out, "real", kernel.dimension(), kernel.t, kernel.source, provenance);
    out.precision(17);
    for (Eigen::Index r = 0; r < kernel.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < kernel.values.cols(); ++c) {
            if (c) out << ',';
            out << kernel.values(r, c);
        }
        out << '\n';
    }
}

void write_csv(std::ostream& out, const ComplexKernel& kernel, const std::string& provenance) {
    write_header(out, "complex", kernel.dimension(), kernel.t, kernel.source, provenance);
    out.precision(17);
    for (Eigen::Index r = 0; r < kernel.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < kernel.values.cols(); ++c) {
            if (c) out << ',';
            out << kernel.values(r, c).real() << ',' << kernel.values(r, c).imag();
        }
        out << '\n';
    }
}

void write_csv(std::ostream& out, const Eigen::MatrixXcd& values, const std::string& provenance) {
    write_csv(out, ComplexKernel{values, 0.0, {}}, provenance);
}

}  // namespace smech
