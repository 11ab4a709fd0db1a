#include "fqc/state_prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "fqc/parallel.hpp"

namespace fqc {

FloquetDensity make_pseudo_pure(const PseudoPureSpec& spec, ModeTruncation trunc)
{
    if (std::abs(spec.alpha) > 1.0)
        throw InvalidArgument("pseudo-pure purity alpha must satisfy |alpha| <= 1");
    if (spec.n_spins != 1)
        throw InvalidArgument("only single-spin Floquet spaces are supported");
    const int dim = trunc.dim();
    const int row = flatten(spec.target, trunc);
    FloquetDensity out;
    out.trunc = trunc;
    out.alpha = spec.alpha;
    out.label = spec.target;
    out.matrix = Mat::Identity(dim, dim) * ((1.0 - spec.alpha) / dim);
    out.matrix(row, row) += spec.alpha;
    if (spec.alpha == 1.0) {
        out.matrix.setZero();
        out.matrix(row, row) = 1.0;
    }
    return out;
}

FloquetDensity thermal_density(ModeTruncation trunc, double polarization, ThermalConvention conv)
{
    Mat2 s0 = 0.5 * (Mat2::Identity() + polarization * 2.0 * spin_z());
    FloquetDensity out;
    out.trunc = trunc;
    out.matrix = Mat::Zero(trunc.dim(), trunc.dim());
    if (conv == ThermalConvention::central_mode) {
        out.matrix.block<2, 2>(2 * trunc.K, 2 * trunc.K) = s0;
    } else {
        for (int n = -trunc.K; n <= trunc.K; ++n)
            out.matrix.block<2, 2>(2 * (n + trunc.K), 2 * (n + trunc.K)) = s0 / double(trunc.modes());
    }
    out.alpha = polarization;
    return out;
}

double pseudo_pure_fidelity(const Mat& sigma, ModeTruncation trunc, FloquetIndex target)
{
    Mat2 blk = mode_block(sigma, trunc, target.n, target.n);
    Mat2 dev = blk - 0.5 * blk.trace() * Mat2::Identity();
    Mat2 tgt = Mat2::Zero();
    tgt(target.p, target.p) = 1.0;
    tgt -= 0.5 * Mat2::Identity();
    double norm = dev.norm() * tgt.norm();
    if (norm == 0.0)
        return 0.0;
    return (dev.adjoint() * tgt).trace().real() / norm;
}

// ---------------------------------------------------------------- PASS

namespace {

constexpr int kPassHarmonics = 2;  // chemical-shift modulation carries only w_r and 2 w_r

Eigen::Matrix<double, 5, 1> pass_equations(const Eigen::Matrix<double, 5, 1>& th, double Theta, double theta_T)
{
    Eigen::Matrix<double, 5, 1> r;
    for (int m = 1; m <= kPassHarmonics; ++m) {
        cplx s = 1.0 + std::exp(kI * double(m) * (Theta + theta_T));
        for (int q = 1; q <= 5; ++q)
            s += 2.0 * (q % 2 ? -1.0 : 1.0) * std::exp(kI * double(m) * th(q - 1));
        r(2 * (m - 1)) = s.real();
        r(2 * (m - 1) + 1) = s.imag();
    }
    double lin = theta_T;
    for (int q = 1; q <= 5; ++q)
        lin += 2.0 * (q % 2 ? -1.0 : 1.0) * th(q - 1);
    r(4) = lin;
    return r;
}

Eigen::Matrix<double, 5, 5> pass_jacobian(const Eigen::Matrix<double, 5, 1>& th)
{
    Eigen::Matrix<double, 5, 5> j;
    for (int q = 1; q <= 5; ++q) {
        double sg = q % 2 ? -1.0 : 1.0;
        for (int m = 1; m <= kPassHarmonics; ++m) {
            cplx d = 2.0 * sg * kI * double(m) * std::exp(kI * double(m) * th(q - 1));
            j(2 * (m - 1), q - 1) = d.real();
            j(2 * (m - 1) + 1, q - 1) = d.imag();
        }
        j(4, q - 1) = 2.0 * sg;
    }
    return j;
}

bool admissible(const Eigen::Matrix<double, 5, 1>& th, double theta_T)
{
    if (th(0) <= 0.0 || th(4) >= theta_T)
        return false;
    for (int i = 1; i < 5; ++i)
        if (th(i) <= th(i - 1))
            return false;
    return true;
}

// Levenberg-Marquardt on the stacked real residuals
Eigen::Matrix<double, 5, 1> levenberg_marquardt(Eigen::Matrix<double, 5, 1> x, double Theta, double theta_T)
{
    double lambda = 1e-3;
    auto r = pass_equations(x, Theta, theta_T);
    double cost = r.squaredNorm();
    for (int it = 0; it < 200 && cost > 1e-30; ++it) {
        auto j = pass_jacobian(x);
        Eigen::Matrix<double, 5, 5> jtj = j.transpose() * j;
        Eigen::Matrix<double, 5, 1> g = j.transpose() * r;
        bool improved = false;
        for (int inner = 0; inner < 30; ++inner) {
            Eigen::Matrix<double, 5, 5> a = jtj;
            a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
            Eigen::Matrix<double, 5, 1> step = a.colPivHouseholderQr().solve(-g);
            auto xn = x + step;
            auto rn = pass_equations(xn, Theta, theta_T);
            double cn = rn.squaredNorm();
            if (cn < cost) {
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 10.0, 1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved)
            break;
    }
    return x;
}

}  // namespace

double pass_residual(const std::array<double, 5>& positions, double Theta, double theta_T)
{
    Eigen::Matrix<double, 5, 1> th;
    for (int i = 0; i < 5; ++i)
        th(i) = positions[static_cast<size_t>(i)];
    return pass_equations(th, Theta, theta_T).cwiseAbs().maxCoeff();
}

namespace {

bool try_seed(const Eigen::Matrix<double, 5, 1>& seed, double Theta, PassSchedule& out, double& best)
{
    auto x = levenberg_marquardt(seed, Theta, out.theta_T);
    double res = pass_equations(x, Theta, out.theta_T).cwiseAbs().maxCoeff();
    if (!admissible(x, out.theta_T))
        return false;
    best = std::min(best, res);
    if (res > 1e-10)
        return false;
    for (int i = 0; i < 5; ++i)
        out.positions[static_cast<size_t>(i)] = x(i);
    out.residual = res;
    return true;
}

PassSchedule solve_from(int n_sidebands, double Theta, const PassSchedule* previous)
{
    if (n_sidebands < 1)
        throw InvalidArgument("n_sidebands must be >= 1");
    if (!(Theta >= 0.0 && Theta < kTwoPi))
        throw InvalidArgument("pitch Theta must lie in [0, 2pi)");
    PassSchedule out;
    out.Theta = Theta;
    out.n_sidebands = n_sidebands;
    out.theta_T = kTwoPi;
    double best = std::numeric_limits<double>::infinity();
    if (previous) {
        Eigen::Matrix<double, 5, 1> seed;
        for (int i = 0; i < 5; ++i)
            seed(i) = previous->positions[static_cast<size_t>(i)];
        if (try_seed(seed, Theta, out, best))
            return out;
    }
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int round = 0; round < 16; ++round) {
        for (int s = 0; s < 16; ++s) {
            std::array<double, 5> v;
            for (auto& e : v)
                e = u(rng);
            std::sort(v.begin(), v.end());
            Eigen::Matrix<double, 5, 1> seed;
            for (int i = 0; i < 5; ++i)
                seed(i) = v[static_cast<size_t>(i)];
            if (try_seed(seed, Theta, out, best))
                return out;
        }
    }
    std::ostringstream os;
    os << "PASS timing solver failed for Theta=" << Theta << " (best admissible residual " << best << ")";
    throw ScientificFailure(os.str());
}

}  // namespace

PassSchedule solve_pass_timings(int n_sidebands, double Theta)
{
    return solve_from(n_sidebands, Theta, nullptr);
}

std::vector<PassSchedule> solve_pass_sweep(int n_sidebands, const std::vector<double>& thetas)
{
    std::vector<PassSchedule> out;
    for (double th : thetas)
        out.push_back(solve_from(n_sidebands, th, out.empty() ? nullptr : &out.back()));
    return out;
}

std::vector<cplx> pass_closed_form(double Theta, const SidebandProfile& a, double delta0, double omega_r,
                                   const std::vector<double>& t2)
{
    std::vector<cplx> out(t2.size(), 0.0);
    for (size_t i = 0; i < t2.size(); ++i)
        for (int k = -a.K; k <= a.K; ++k)
            out[i] += a[k] * std::exp(-kI * double(k) * Theta) * std::exp(kI * (delta0 + k * omega_r) * t2[i]);
    return out;
}

PassFid simulate_pass_fid(const PassSchedule& schedule, const SpinParams& params, const RotorConfig& rotor,
                          const std::vector<double>& t2, int rotor_phases, int threads)
{
    if (schedule.residual > 1e-8 || pass_residual(schedule.positions, schedule.Theta, schedule.theta_T) > 1e-8)
        throw InvalidArgument("PASS schedule residual out of tolerance");
    const double w = rotor.omega_r;
    const double T = schedule.theta_T / w;
    const int Kp = propagator_truncation(params, rotor);
    const ModeTruncation tr{Kp};
    const Mat2 pi_x = rf_spin_propagator(RfPulse::ideal(kPi, RfPhase::x));

    // I_x = (|+x><+x| - |-x><-x|) / 2
    Eigen::Vector2cd plus(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    Eigen::Vector2cd minus(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
    const Mat2 det = spin_minus();

    std::vector<std::vector<cplx>> partial(static_cast<size_t>(rotor_phases), std::vector<cplx>(t2.size(), 0.0));
    for_each_chunk(static_cast<size_t>(rotor_phases), 1, threads, [&](size_t j, size_t, size_t) {
        SpinParams p = params;
        p.alpha += kTwoPi * double(j) / rotor_phases;
        auto eig = diagonalize(cs_floquet_hamiltonian(p, rotor, tr));
        for (int s = 0; s < 2; ++s) {
            const double wgt = s == 0 ? 0.5 : -0.5;
            Vec phi = Vec::Zero(tr.dim());
            phi.segment<2>(2 * Kp) = s == 0 ? plus : minus;
            double tprev = 0.0;
            for (double pos : schedule.positions) {
                double tq = pos / w;
                phi = propagate(eig, phi, tq - tprev);
                for (int n = -Kp; n <= Kp; ++n)
                    phi.segment<2>(2 * (n + Kp)) = pi_x * phi.segment<2>(2 * (n + Kp));
                tprev = tq;
            }
            phi = propagate(eig, phi, T - tprev);
            for (size_t i = 0; i < t2.size(); ++i) {
                Vec ph = propagate(eig, phi, t2[i]);
                Eigen::Vector2cd psi = hilbert_state(ph, tr, w, T + t2[i]);
                partial[j][i] += wgt * psi.dot(det * psi);
            }
        }
    });

    PassFid out;
    out.simulated.assign(t2.size(), 0.0);
    for (const auto& row : partial)
        for (size_t i = 0; i < t2.size(); ++i)
            out.simulated[i] += row[i];
    // Tr[I_- I_x] = 1/2
    for (auto& v : out.simulated)
        v *= 2.0 / rotor_phases;

    const int Ka = adaptive_truncation(params, rotor, 1e-12);
    int quad = 512;
    while (quad <= 4 * Ka)
        quad *= 2;
    auto sb = sideband_amplitudes(params, rotor, Ka, quad);
    out.closed_form = pass_closed_form(schedule.Theta, sb.A, params.delta0 + static_anisotropy(params, rotor), w, t2);
    double scale = 0.0;
    for (auto& v : out.closed_form)
        scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < t2.size(); ++i)
        out.max_rel_diff = std::max(out.max_rel_diff, std::abs(out.closed_form[i] - out.simulated[i]) / scale);
    out.flagged = out.max_rel_diff > 1e-4;
    return out;
}

std::vector<double> equispaced_thetas(int n)
{
    std::vector<double> out(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(j)] = kTwoPi * j / n;
    return out;
}

ProfileWeights solve_profile_weights(const SidebandProfile& target, const std::vector<double>& thetas,
                                     const SidebandProfile& a)
{
    const int K = target.K;
    const int n = 2 * K + 1;
    if (static_cast<int>(thetas.size()) != n)
        throw InvalidArgument("profile weights need one Theta per retained sideband order (" + std::to_string(n) +
                              "), got " + std::to_string(thetas.size()));
    Mat A(n, n);
    Vec rhs(n);
    for (int k = -K; k <= K; ++k) {
        for (int j = 0; j < n; ++j)
            A(k + K, j) = a[k] * std::exp(-kI * double(k) * thetas[static_cast<size_t>(j)]);
        rhs(k + K) = target[k];
    }
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& sv = svd.singularValues();
    double cond = sv(n - 1) == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / sv(n - 1);
    if (cond > 1e12) {
        std::ostringstream os;
        os << "profile weight system is numerically singular (condition " << cond
           << "); choose a different Theta set or fewer sideband orders";
        throw ScientificFailure(os.str());
    }
    Vec x = A.partialPivLu().solve(rhs);
    ProfileWeights w;
    w.thetas = thetas;
    w.target = target;
    w.condition = cond;
    w.x.assign(x.data(), x.data() + n);
    w.residual = (A * x - rhs).cwiseAbs().maxCoeff();
    w.realizable = std::all_of(w.x.begin(), w.x.end(),
                               [](cplx v) { return std::abs(v.imag()) <= 1e-12 && std::abs(v.real()) <= 1.0; });
    return w;
}

std::vector<cplx> resynthesize(const ProfileWeights& w, const SidebandProfile& a, double delta0, double omega_r,
                               const std::vector<double>& t2)
{
    std::vector<cplx> out(t2.size(), 0.0);
    for (size_t j = 0; j < w.thetas.size(); ++j) {
        auto s = pass_closed_form(w.thetas[j], a, delta0, omega_r, t2);
        for (size_t i = 0; i < t2.size(); ++i)
            out[i] += w.x[j] * s[i];
    }
    return out;
}

// ---------------------------------------------------------------- gradients

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d)
{
    if (d == 0)
        throw InvalidArgument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational operator+(Rational a, Rational b)
{
    std::int64_t g = std::gcd(a.den, b.den);
    return Rational(a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den);
}

Rational operator*(Rational a, Rational b)
{
    std::int64_t g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
    std::int64_t g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return Rational((a.num / g1) * (b.num / g2), (a.den / g2) * (b.den / g1));
}

Rational Rational::parse(const std::string& s)
{
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos)
            return Rational(std::stoll(s), 1);
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
        throw InvalidArgument("cannot parse rational '" + s + "'");
    }
}

std::string Rational::str() const
{
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

bool gradient_selection_survives(int p, int q, int k, int l, const GradientEvent& g1, const GradientEvent& g2,
                                 double omega_r)
{
    (void)omega_r;  // common non-zero factor
    Rational a = Rational(eps(p) * k) * g2.strength * g2.duration;
    Rational b = Rational(eps(q) * l) * g1.strength * g1.duration;
    return (a + b).num == 0;
}

FloquetOperator gradient_floquet_propagator(const GradientEvent& g, const SpinParams& params, const RotorConfig& rotor,
                                            ModeTruncation trunc, double z)
{
    const double gt = g.strength.value() * g.duration.value();
    Mat u = Mat::Zero(trunc.dim(), trunc.dim());
    for (int n = -trunc.K; n <= trunc.K; ++n)
        for (int s = 0; s < 2; ++s) {
            int r = 2 * (n + trunc.K) + s;
            u(r, r) = std::exp(kI * double(eps(s)) * z * gt * (params.delta0 + n * rotor.omega_r) / 2.0);
        }
    return {u, trunc, rotor.omega_r};
}

namespace {

double z_midpoint(int i, int n)
{
    return -0.5 + (i + 0.5) / n;
}

}  // namespace

double pathway_amplitude(int p, int q, int k, int l, const GradientEvent& g1, const GradientEvent& g2,
                         const SpinParams& params, const RotorConfig& rotor, int z_samples)
{
    if (z_samples < 64)
        throw InvalidArgument("z_samples must be >= 64");
    const ModeTruncation tr{std::max(std::abs(k), std::abs(l))};
    const int a1 = flatten({q, l}, tr), b1 = flatten({q, 0}, tr);
    const int a2 = flatten({p, k}, tr), b2 = flatten({p, 0}, tr);
    cplx acc = 0.0;
    for (int i = 0; i < z_samples; ++i) {
        double z = z_midpoint(i, z_samples);
        Mat u1 = gradient_floquet_propagator(g1, params, rotor, tr, z).matrix;
        Mat u2 = gradient_floquet_propagator(g2, params, rotor, tr, z).matrix;
        // coefficient of |a><b| after U (.) U^H for a diagonal U
        acc += u1(a1, a1) * std::conj(u1(b1, b1)) * u2(a2, a2) * std::conj(u2(b2, b2));
    }
    return std::abs(acc) / z_samples;
}

FloquetDensity apply_gradient_sandwich(const FloquetDensity& rho, const GradientEvent& g1, const RfPulse& pulse,
                                       const GradientEvent& g2, const SpinParams& params, const RotorConfig& rotor,
                                       int z_samples, int threads)
{
    if (z_samples < 64)
        throw InvalidArgument("z_samples must be >= 64");
    const ModeTruncation tr = rho.trunc;
    const Mat up = rf_floquet_propagator(pulse, rotor, tr, false).matrix;
    const size_t chunk = 64;
    std::vector<Mat> partial(chunk_count(static_cast<size_t>(z_samples), chunk));
    for_each_chunk(static_cast<size_t>(z_samples), chunk, threads, [&](size_t c, size_t b, size_t e) {
        Mat acc = Mat::Zero(tr.dim(), tr.dim());
        for (size_t i = b; i < e; ++i) {
            double z = z_midpoint(static_cast<int>(i), z_samples);
            Vec d1 = gradient_floquet_propagator(g1, params, rotor, tr, z).matrix.diagonal();
            Vec d2 = gradient_floquet_propagator(g2, params, rotor, tr, z).matrix.diagonal();
            Mat m = d1.asDiagonal() * rho.matrix * d1.conjugate().asDiagonal();
            m = up * m * up.adjoint();
            acc += d2.asDiagonal() * m * d2.conjugate().asDiagonal();
        }
        partial[c] = acc;
    });
    FloquetDensity out = rho;
    out.matrix = Mat::Zero(tr.dim(), tr.dim());
    for (const auto& m : partial)
        out.matrix += m;
    out.matrix /= double(z_samples);
    out.label.reset();
    return out;
}

namespace {

double max_offdiagonal(const Mat& m)
{
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j)
                best = std::max(best, std::abs(m(i, j)));
    return best;
}

Rational rotor_period_seconds(const RotorConfig& rotor)
{
    // exact when the spinning rate is a whole number of micro-hertz
    const double hz = rotor.omega_r / kTwoPi;
    return Rational(1000000, static_cast<std::int64_t>(std::llround(hz * 1e6)));
}

}  // namespace

GradientPreparation prepare_by_gradient(FloquetIndex target, const SpinParams& params, const RotorConfig& rotor,
                                        ModeTruncation trunc, int z_samples, int threads)
{
    if (target.n != 0)
        throw InvalidArgument("gradient labeling from the thermal state reaches mode 0 only; target m=" +
                              std::to_string(target.n) + " needs the PASS method");
    if (target.p < 0 || target.p > 1)
        throw InvalidArgument("spin index must be 0 or 1");
    GradientPreparation out;
    // thermal populations picked up mode coherences during an unsynchronized delay
    auto thermal = thermal_density(trunc, 0.1, ThermalConvention::central_mode);
    auto eig = diagonalize(cs_floquet_hamiltonian(params, rotor, trunc));
    out.input = evolve(thermal, floquet_propagator(eig, 0.37 * rotor.period()));
    out.input.alpha = thermal.alpha;

    const Rational period = rotor_period_seconds(rotor);
    out.g1 = {Rational(2), period};
    out.g2 = {Rational(4), period};
    out.pulse = target.p == 0 ? RfPulse{0.0, 0.0, RfPhase::x} : RfPulse::ideal(kPi, RfPhase::x);
    out.output = apply_gradient_sandwich(out.input, out.g1, out.pulse, out.g2, params, rotor, z_samples, threads);
    out.output.label = target;
    out.fidelity = pseudo_pure_fidelity(out.output.matrix, trunc, target);
    out.input_coherence = max_offdiagonal(out.input.matrix);
    out.output_coherence = max_offdiagonal(out.output.matrix);
    return out;
}

}  // namespace fqc
