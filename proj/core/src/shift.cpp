#include "fqc/shift.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fqc {

std::array<double, 3> SpinParams::principal() const
{
    return {delta0 + 0.5 * delta * (1.0 + eta), delta0 + 0.5 * delta * (1.0 - eta), delta0 - delta};
}

SpinParams SpinParams::from_principal(double s11, double s22, double s33, double alpha, double beta, double gamma)
{
    if (!(s11 >= s22 && s22 >= s33))
        throw InvalidArgument("principal values must satisfy sigma11 >= sigma22 >= sigma33");
    SpinParams p;
    p.delta0 = (s11 + s22 + s33) / 3.0;
    p.delta = p.delta0 - s33;
    p.eta = p.delta == 0.0 ? 0.0 : (s11 - s22) / p.delta;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    return p;
}

void SpinParams::validate() const
{
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InvalidArgument("asymmetry eta must lie in [0, 1]");
    if (delta < 0.0)
        throw InvalidArgument("anisotropy delta must be non-negative (sigma11 >= sigma22 >= sigma33)");
    if (!std::isfinite(delta0) || !std::isfinite(delta) || !std::isfinite(alpha) || !std::isfinite(beta) ||
        !std::isfinite(gamma))
        throw InvalidArgument("spin parameters must be finite");
}

double magic_angle()
{
    return std::acos(1.0 / std::sqrt(3.0));
}

double legendre_p2(double x)
{
    return 0.5 * (3.0 * x * x - 1.0);
}

OrientationCoefficients orientation_coefficients(const SpinParams& params, const RotorConfig& rotor)
{
    const double th = rotor.theta;
    const double a = params.alpha, b = params.beta, g = params.gamma, eta = params.eta;
    const double k1 = 0.5 * std::sin(2.0 * th) * std::sin(b);
    const double k2 = 0.5 * std::sin(th) * std::sin(th);
    const double cb = std::cos(b), sb = std::sin(b);

    const double a1 = -k1 * cb * (eta * std::cos(2.0 * g) + 3.0);
    const double b1 = k1 * eta * std::sin(2.0 * g);
    const double a2 = k2 * (1.5 * sb * sb - 0.5 * eta * std::cos(2.0 * g) * (1.0 + cb * cb));
    const double b2 = k2 * eta * cb * std::sin(2.0 * g);

    OrientationCoefficients c;
    c.C1 = a1 * std::cos(a) + b1 * std::sin(a);
    c.S1 = -a1 * std::sin(a) + b1 * std::cos(a);
    c.C2 = a2 * std::cos(2.0 * a) + b2 * std::sin(2.0 * a);
    c.S2 = -a2 * std::sin(2.0 * a) + b2 * std::cos(2.0 * a);
    return c;
}

double static_anisotropy(const SpinParams& params, const RotorConfig& rotor)
{
    const double sb = std::sin(params.beta);
    return params.delta * legendre_p2(std::cos(rotor.theta)) *
           (legendre_p2(std::cos(params.beta)) - 0.5 * params.eta * sb * sb * std::cos(2.0 * params.gamma));
}

namespace {

double amplitude(const SpinParams& params)
{
    return 0.5 * std::sqrt(3.0) * params.delta;
}

}  // namespace

double shift_frequency(const SpinParams& params, const RotorConfig& rotor, double t)
{
    const auto c = orientation_coefficients(params, rotor);
    const double ph = rotor.omega_r * t;
    const double xi = c.C1 * std::cos(ph) + c.S1 * std::sin(ph) + c.C2 * std::cos(2.0 * ph) + c.S2 * std::sin(2.0 * ph);
    return params.delta0 + static_anisotropy(params, rotor) + amplitude(params) * xi;
}

Mat2 cs_hamiltonian(const SpinParams& params, const RotorConfig& rotor, double t)
{
    return -spin_z() * shift_frequency(params, rotor, t);
}

FourierBlocks cs_fourier_blocks(const SpinParams& params, const RotorConfig& rotor)
{
    const auto c = orientation_coefficients(params, rotor);
    const double amp = amplitude(params);
    const Mat2 iz = spin_z();
    FourierBlocks b;
    b[0] = -iz * (params.delta0 + static_anisotropy(params, rotor));
    b[1] = -iz * (0.5 * amp * cplx(c.C1, -c.S1));
    b[-1] = -iz * (0.5 * amp * cplx(c.C1, c.S1));
    b[2] = -iz * (0.5 * amp * cplx(c.C2, -c.S2));
    b[-2] = -iz * (0.5 * amp * cplx(c.C2, c.S2));
    return b;
}

FloquetOperator cs_floquet_hamiltonian(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc)
{
    return assemble_floquet_hamiltonian(cs_fourier_blocks(params, rotor), rotor.omega_r, trunc);
}

double sideband_phase(const SpinParams& params, const RotorConfig& rotor, double phi)
{
    const auto c = orientation_coefficients(params, rotor);
    return amplitude(params) / rotor.omega_r *
           (c.C1 * std::sin(phi) - c.S1 * std::cos(phi) + 0.5 * c.C2 * std::sin(2.0 * phi) -
            0.5 * c.S2 * std::cos(2.0 * phi));
}

cplx SidebandProfile::operator[](int n) const
{
    if (n < -K || n > K)
        return 0.0;
    return values[static_cast<size_t>(n + K)];
}

cplx& SidebandProfile::at(int n)
{
    if (n < -K || n > K)
        throw InvalidArgument("sideband index " + std::to_string(n) + " outside K=" + std::to_string(K));
    return values[static_cast<size_t>(n + K)];
}

SidebandProfile SidebandProfile::zeros(SidebandKind kind, int K)
{
    SidebandProfile p;
    p.kind = kind;
    p.K = K;
    p.values.assign(static_cast<size_t>(2 * K + 1), 0.0);
    return p;
}

namespace {

// (1/2pi) \oint exp(i(-n phi + s * Phi(phi))) by the trapezoid rule
std::vector<cplx> phase_fourier(const SpinParams& params, const RotorConfig& rotor, double s, int K, int M)
{
    std::vector<cplx> samples(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) {
        double phi = kTwoPi * j / M;
        samples[static_cast<size_t>(j)] = std::exp(kI * s * sideband_phase(params, rotor, phi));
    }
    // exp(-i n phi_j) = roots[(n j) mod M]
    std::vector<cplx> roots(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j)
        roots[static_cast<size_t>(j)] = std::exp(-kI * (kTwoPi * j / M));
    std::vector<cplx> out(static_cast<size_t>(2 * K + 1));
    for (int n = -K; n <= K; ++n) {
        cplx acc = 0.0;
        const long long nm = ((n % M) + M) % M;
        for (int j = 0; j < M; ++j)
            acc += samples[static_cast<size_t>(j)] * roots[static_cast<size_t>((nm * j) % M)];
        out[static_cast<size_t>(n + K)] = acc / double(M);
    }
    return out;
}

}  // namespace

SidebandResult sideband_amplitudes(const SpinParams& params, const RotorConfig& rotor, int K, int quadrature_points)
{
    const int M = quadrature_points;
    if (M < 64 || (M & (M - 1)) != 0)
        throw InvalidArgument("quadrature_points must be a power of two >= 64");
    if (K < 0)
        throw InvalidArgument("K must be non-negative");
    if (M <= 2 * K)
        throw InvalidArgument("quadrature_points must exceed 2K to resolve the requested orders");
    params.validate();

    SidebandResult r;
    r.F = SidebandProfile::zeros(SidebandKind::field, K);
    r.A = SidebandProfile::zeros(SidebandKind::intensity, K);
    auto f = phase_fourier(params, rotor, 1.0, K, M);
    for (int n = -K; n <= K; ++n) {
        r.F.at(n) = f[static_cast<size_t>(n + K)];
        r.A.at(n) = std::norm(r.F[n]);
        r.total += r.A[n].real();
    }
    r.converged = r.total >= 1.0 - 1e-6;
    if (!r.converged) {
        std::ostringstream os;
        os << "sum of A_n = " << r.total << " at K=" << K << " (deficit " << 1.0 - r.total << "); increase K";
        r.warning = os.str();
    }
    return r;
}

namespace {

int quadrature_for(int K)
{
    int M = 512;
    while (M <= 4 * K + 64)
        M *= 2;
    return M;
}

}  // namespace

int adaptive_truncation(const SpinParams& params, const RotorConfig& rotor, double tol, int k_max)
{
    double sum = 0.0;
    for (int kk = std::min(32, k_max);; kk = std::min(2 * kk, k_max)) {
        auto f = phase_fourier(params, rotor, 1.0, kk, quadrature_for(kk));
        sum = std::norm(f[static_cast<size_t>(kk)]);
        if (sum >= 1.0 - tol)
            return 0;
        for (int K = 1; K <= kk; ++K) {
            sum += std::norm(f[static_cast<size_t>(kk + K)]) + std::norm(f[static_cast<size_t>(kk - K)]);
            if (sum >= 1.0 - tol)
                return K;
        }
        if (kk == k_max)
            break;
    }
    std::ostringstream os;
    os << "adaptive truncation exhausted at K=" << k_max << ": sum of A_n deficit " << 1.0 - sum;
    throw ScientificFailure(os.str());
}

int propagator_truncation(const SpinParams& params, const RotorConfig& rotor)
{
    return 2 * adaptive_truncation(params, rotor, 1e-12) + 6;
}

RfPulse RfPulse::ideal(double flip, RfPhase phase)
{
    RfPulse p;
    p.tp = 1e-9;
    p.omega1 = flip / p.tp;
    p.phase = phase;
    return p;
}

double phase_angle(RfPhase phase)
{
    switch (phase) {
    case RfPhase::x: return 0.0;
    case RfPhase::y: return 0.5 * kPi;
    case RfPhase::minus_x: return kPi;
    case RfPhase::minus_y: return 1.5 * kPi;
    }
    return 0.0;
}

RfPhase parse_phase(const std::string& s)
{
    if (s == "x" || s == "+x") return RfPhase::x;
    if (s == "-x") return RfPhase::minus_x;
    if (s == "y" || s == "+y") return RfPhase::y;
    if (s == "-y") return RfPhase::minus_y;
    throw InvalidArgument("unknown pulse phase '" + s + "'");
}

std::string to_string(RfPhase phase)
{
    switch (phase) {
    case RfPhase::x: return "x";
    case RfPhase::y: return "y";
    case RfPhase::minus_x: return "-x";
    case RfPhase::minus_y: return "-y";
    }
    return "?";
}

Mat2 rf_spin_propagator(const RfPulse& pulse)
{
    // exp(+i flip n.I) = cos(flip/2) + 2i sin(flip/2) n.I
    const double ph = phase_angle(pulse.phase);
    const double half = 0.5 * pulse.flip();
    Mat2 gen = std::cos(ph) * spin_x() + std::sin(ph) * spin_y();
    return std::cos(half) * Mat2::Identity() + kI * 2.0 * std::sin(half) * gen;
}

FloquetOperator rf_floquet_propagator(const RfPulse& pulse, const RotorConfig& rotor, ModeTruncation trunc, bool exact)
{
    if (pulse.tp < 0)
        throw InvalidArgument("pulse width must be non-negative");
    if (!exact && trunc.K * rotor.omega_r * pulse.tp > 0.1)
        throw InvalidArgument("simplified RF propagator requested with K*w_r*t_p = " +
                              std::to_string(trunc.K * rotor.omega_r * pulse.tp) + " > 0.1");
    const Mat2 u = rf_spin_propagator(pulse);
    Mat out = Mat::Zero(trunc.dim(), trunc.dim());
    for (int n = -trunc.K; n <= trunc.K; ++n) {
        cplx ph = exact ? std::exp(-kI * double(n) * rotor.omega_r * pulse.tp) : cplx(1.0);
        out.block<2, 2>(2 * (n + trunc.K), 2 * (n + trunc.K)) = u * ph;
    }
    return {out, trunc, rotor.omega_r};
}

std::map<int, Mat2> cs_propagator_components(const SpinParams& params, const RotorConfig& rotor, double t, int K)
{
    if (K < 0)
        throw InvalidArgument("K must be non-negative");
    const double w = rotor.omega_r;
    const double d0 = params.delta0 + static_anisotropy(params, rotor);
    const int KG = 2 * K + 16;
    const int M = quadrature_for(KG);
    std::map<int, Mat2> out;
    for (int n = -K; n <= K; ++n)
        out[n] = Mat2::Zero();
    for (int p = 0; p < 2; ++p) {
        const double ep = eps(p);
        // e^{-i eps_p Phi / 2} = sum_n G_n e^{i n phi}
        auto g = phase_fourier(params, rotor, -0.5 * ep, KG, M);
        auto G = [&](int n) -> cplx { return std::abs(n) > KG ? cplx(0.0) : g[static_cast<size_t>(n + KG)]; };
        const double e0 = 0.5 * ep * d0;
        for (int n = -K; n <= K; ++n) {
            cplx acc = 0.0;
            for (int j = -KG; j <= KG; ++j)
                acc += G(n - j) * std::conj(G(-j)) * std::exp(-kI * (e0 + j * w) * t);
            out[n](p, p) = acc * std::exp(kI * double(n) * w * t);
        }
    }
    return out;
}

Mat2 cs_exact_propagator(const SpinParams& params, const RotorConfig& rotor, double t_b, double t_a)
{
    const double d0 = params.delta0 + static_anisotropy(params, rotor);
    const double w = rotor.omega_r;
    const double W = d0 * (t_b - t_a) + sideband_phase(params, rotor, w * t_b) - sideband_phase(params, rotor, w * t_a);
    Mat2 u = Mat2::Zero();
    u(0, 0) = std::exp(0.5 * kI * W);
    u(1, 1) = std::exp(-0.5 * kI * W);
    return u;
}

}  // namespace fqc
