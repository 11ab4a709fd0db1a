#include "fqc/readout.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "fqc/parallel.hpp"

namespace fqc {

Detection parse_detection(const std::string& s)
{
    if (s == "x")
        return Detection::x;
    if (s == "y")
        return Detection::y;
    if (s == "quadrature" || s == "+")
        return Detection::quadrature;
    throw InvalidArgument("unknown detection channel '" + s + "' (expected x, y or quadrature)");
}

std::string to_string(Detection d)
{
    switch (d) {
    case Detection::x: return "x";
    case Detection::y: return "y";
    default: return "quadrature";
    }
}

FidGrid FidGrid::for_rotor(const RotorConfig& rotor, int n)
{
    return {n, rotor.period() / 64.0};
}

double FidGrid::resolved_dwell(const RotorConfig& rotor) const
{
    if (n < 2 || (n & (n - 1)) != 0)
        throw InvalidArgument("FID sample count must be a power of two, got " + std::to_string(n));
    if (dwell < 0.0 || !std::isfinite(dwell))
        throw InvalidArgument("dwell must be non-negative");
    return dwell > 0.0 ? dwell : rotor.period() / 64.0;
}

std::size_t Spectrum::nearest_bin(double f_hz) const
{
    if (frequency_hz.empty())
        throw InvalidArgument("empty spectrum");
    auto it = std::lower_bound(frequency_hz.begin(), frequency_hz.end(), f_hz);
    std::size_t i = static_cast<std::size_t>(it - frequency_hz.begin());
    if (i == frequency_hz.size())
        return i - 1;
    if (i > 0 && std::abs(frequency_hz[i - 1] - f_hz) <= std::abs(frequency_hz[i] - f_hz))
        return i - 1;
    return i;
}

cplx Spectrum::at(double f_hz) const
{
    return amplitude[nearest_bin(f_hz)];
}

namespace {

int quadrature_points(int K)
{
    int M = 512;
    while (M <= 4 * K + 64)
        M *= 2;
    return M;
}

void check_state(int p, int m, int K)
{
    if (p != 0 && p != 1)
        throw InvalidArgument("spin index p must be 0 or 1");
    if (K < 0 || std::abs(m) > K)
        throw InvalidArgument("mode index m=" + std::to_string(m) + " outside [-K, K] for K=" + std::to_string(K));
}

template <class Amp>
std::vector<Stick> index_sticks(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K, Amp amp)
{
    const double d0 = params.delta0 + static_anisotropy(params, rotor);
    const double e = eps(p);
    std::vector<Stick> out;
    for (int k = -K; k <= K; ++k) {
        const int j = k - m;
        out.push_back({e * (d0 + j * rotor.omega_r), e * amp(j)});
    }
    return out;
}

}  // namespace

std::vector<Stick> analytic_sticks(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K)
{
    check_state(p, m, K);
    const int ka = K + std::abs(m);
    auto sb = sideband_amplitudes(params, rotor, ka, quadrature_points(ka));
    return index_sticks(p, m, params, rotor, K, [&](int j) { return sb.A[j]; });
}

std::vector<Stick> crystal_sticks(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K)
{
    check_state(p, m, K);
    const int ka = K + std::abs(m);
    auto sb = sideband_amplitudes(params, rotor, ka, quadrature_points(ka));
    const cplx ref = std::exp(kI * sideband_phase(params, rotor, 0.0));
    return index_sticks(p, m, params, rotor, K, [&](int j) { return std::conj(sb.F[j]) * ref; });
}

FidTrace synthesize_fid(const std::vector<Stick>& sticks, Detection detection, const FidGrid& grid,
                        const RotorConfig& rotor)
{
    FidTrace fid;
    fid.dwell = grid.resolved_dwell(rotor);
    fid.detection = detection;
    fid.samples.assign(static_cast<std::size_t>(grid.n), 0.0);
    for (int i = 0; i < grid.n; ++i) {
        const double t = fid.dwell * i;
        cplx s = 0.0;
        for (const auto& st : sticks) {
            cplx em = std::exp(-kI * st.omega * t);
            switch (detection) {
            case Detection::quadrature: s += st.amplitude * em; break;
            case Detection::x: s += st.amplitude * 0.5 * (em + std::conj(em)); break;
            case Detection::y: s += st.amplitude * 0.5 * kI * (std::conj(em) - em); break;
            }
        }
        fid.samples[static_cast<std::size_t>(i)] = s;
    }
    return fid;
}

FidTrace analytic_fid(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K, Detection detection,
                      const FidGrid& grid)
{
    return synthesize_fid(analytic_sticks(p, m, params, rotor, K), detection, grid, rotor);
}

FidTrace simulate_fid(const FloquetDensity& sigma0, const SpinParams& params, const RotorConfig& rotor,
                      const FidGrid& grid, const SimulationOptions& opts)
{
    const double dwell = grid.resolved_dwell(rotor);
    const int K = std::max(opts.K > 0 ? opts.K : propagator_truncation(params, rotor), sigma0.trunc.K);
    const ModeTruncation tr{K};
    const int dim = tr.dim();
    const double w = rotor.omega_r;
    if (opts.rotor_phases < 1)
        throw InvalidArgument("rotor_phases must be >= 1");

    Mat sigma = embed(sigma0.matrix, sigma0.trunc, tr);
    const Mat2 u90 = rf_spin_propagator(RfPulse::ideal(kPi / 2, RfPhase::x));
    Mat b = Mat::Zero(dim, dim);
    for (int n = 0; n < tr.modes(); ++n)
        b.block<2, 2>(2 * n, 2 * n) = u90;
    sigma = b * sigma * b.adjoint();
    sigma = 0.5 * (sigma + sigma.adjoint());

    // sigma as a weighted sum of pure Floquet vectors; the identity part drops out of the traceless I_+
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<std::pair<double, Vec>> parts;
    for (int i = 0; i < dim; ++i)
        if (lmax > 0.0 && std::abs(es.eigenvalues()(i)) > 1e-14 * lmax)
            parts.emplace_back(es.eigenvalues()(i), es.eigenvectors().col(i));

    const std::size_t nt = static_cast<std::size_t>(grid.n);
    const std::size_t nph = static_cast<std::size_t>(opts.rotor_phases);
    std::vector<std::vector<cplx>> acc(nph, std::vector<cplx>(nt, 0.0));
    for_each_chunk(nph, 1, opts.threads, [&](std::size_t j, std::size_t, std::size_t) {
        SpinParams pj = params;
        pj.alpha += kTwoPi * double(j) / double(nph);
        auto eig = diagonalize(cs_floquet_hamiltonian(pj, rotor, tr));
        for (const auto& [lambda, v] : parts) {
            Vec c = eig.vectors.adjoint() * v;
            for (std::size_t i = 0; i < nt; ++i) {
                const double t = dwell * double(i);
                Vec ph = c;
                for (int r = 0; r < dim; ++r)
                    ph(r) *= std::exp(-kI * eig.eigenvalues(r) * t);
                Vec phi = eig.vectors * ph;
                Eigen::Vector2cd psi = hilbert_state(phi, tr, w, t);
                acc[j][i] += lambda * std::conj(psi(0)) * psi(1);
            }
        }
    });

    FidTrace fid;
    fid.dwell = dwell;
    fid.detection = Detection::quadrature;
    fid.samples.assign(nt, 0.0);
    for (const auto& row : acc)
        for (std::size_t i = 0; i < nt; ++i)
            fid.samples[i] += row[i];
    for (auto& s : fid.samples)
        s *= 2.0 * kI / double(nph);
    return fid;
}

namespace {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

std::vector<cplx> forward_dft(const std::vector<cplx>& x)
{
    const int n = static_cast<int>(x.size());
    std::vector<cplx> in(x), out(x.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

Spectrum spectrum_of(const FidTrace& fid, double broadening_hz)
{
    const std::size_t n = fid.samples.size();
    if (n == 0)
        throw InvalidArgument("empty FID");
    if (!(fid.dwell > 0.0))
        throw InvalidArgument("FID dwell must be positive");
    auto x = forward_dft(fid.samples);
    Spectrum s;
    s.frequency_hz.resize(n);
    s.amplitude.resize(n);
    const std::size_t half = n / 2;
    const double df = 1.0 / (double(n) * fid.dwell);
    for (std::size_t i = 0; i < n; ++i) {
        // bin i of the shifted spectrum is DFT index (i - half) mod n
        std::size_t src = (i + n - half) % n;
        s.frequency_hz[i] = (double(i) - double(half)) * df;
        s.amplitude[i] = x[src] / double(n);
    }
    if (broadening_hz > 0.0)
        return lorentzian_broaden(s, broadening_hz);
    return s;
}

Spectrum lorentzian_broaden(const Spectrum& s, double fwhm_hz)
{
    if (fwhm_hz < 0.0)
        throw InvalidArgument("broadening must be non-negative");
    Spectrum out = s;
    out.broadening_hz = s.broadening_hz + fwhm_hz;
    const std::size_t n = s.amplitude.size();
    if (fwhm_hz == 0.0 || n < 2)
        return out;
    const double df = s.frequency_hz[1] - s.frequency_hz[0];
    const double g = fwhm_hz / 2.0;
    std::vector<double> kern(n);
    double total = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        double off = (d < n / 2 ? double(d) : double(d) - double(n)) * df;
        kern[d] = g / (kPi * (off * off + g * g));
        total += kern[d];
    }
    for (auto& k : kern)
        k /= total;
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += s.amplitude[j] * kern[(i + n - j) % n];
        out.amplitude[i] = acc;
    }
    return out;
}

PowderGrid PowderGrid::uniform(int n_beta_gamma, int n_alpha)
{
    if (n_beta_gamma < 1 || n_alpha < 1)
        throw InvalidArgument("powder grid sizes must be positive");
    PowderGrid g;
    g.scheme = "uniform-equal-area";
    g.beta_gamma_points = n_beta_gamma;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const double w = 1.0 / (double(n_beta_gamma) * n_alpha);
    for (int i = 0; i < n_beta_gamma; ++i) {
        double cb = 1.0 - (2.0 * i + 1.0) / n_beta_gamma;
        double beta = std::acos(std::clamp(cb, -1.0, 1.0));
        double gamma = std::fmod(golden * i, kTwoPi);
        for (int a = 0; a < n_alpha; ++a)
            g.points.push_back({kTwoPi * a / n_alpha, beta, gamma, w});
    }
    return g;
}

PowderGrid PowderGrid::user(std::vector<Orientation> points)
{
    double total = 0.0;
    for (const auto& o : points) {
        if (!(o.weight >= 0.0))
            throw InvalidArgument("powder weights must be non-negative");
        total += o.weight;
    }
    if (points.empty() || std::abs(total - 1.0) > 1e-9)
        throw InvalidArgument("powder weights must sum to 1");
    PowderGrid g;
    g.scheme = "user-supplied";
    g.points = std::move(points);
    return g;
}

namespace {

FidTrace powder_once(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K, const PowderGrid& grid,
                     const FidGrid& fid_grid, Detection detection, int threads)
{
    using StickMap = std::map<long long, cplx>;
    const std::size_t chunk = 256;
    std::vector<StickMap> partial(chunk_count(grid.points.size(), chunk));
    for_each_chunk(grid.points.size(), chunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        StickMap acc;
        for (std::size_t i = b; i < e; ++i) {
            SpinParams q = params;
            q.alpha = grid.points[i].alpha;
            q.beta = grid.points[i].beta;
            q.gamma = grid.points[i].gamma;
            for (const auto& st : crystal_sticks(p, m, q, rotor, K))
                acc[std::llround(st.omega * 1e3)] += grid.points[i].weight * st.amplitude;
        }
        partial[c] = std::move(acc);
    });
    StickMap total;
    for (const auto& part : partial)
        for (const auto& [key, amp] : part)
            total[key] += amp;
    std::vector<Stick> sticks;
    for (const auto& [key, amp] : total)
        sticks.push_back({double(key) * 1e-3, amp});
    return synthesize_fid(sticks, detection, fid_grid, rotor);
}

}  // namespace

PowderResult powder_spectrum(int p, int m, const SpinParams& params, const RotorConfig& rotor, int K,
                             const PowderGrid& grid, const FidGrid& fid_grid, const PowderOptions& opts)
{
    check_state(p, m, K);
    double total = 0.0;
    for (const auto& o : grid.points)
        total += o.weight;
    if (grid.points.empty() || std::abs(total - 1.0) > 1e-9)
        throw InvalidArgument("powder weights must sum to 1");

    PowderResult r;
    r.fid = powder_once(p, m, params, rotor, K, grid, fid_grid, opts.detection, opts.threads);
    Spectrum base = spectrum_of(r.fid);
    if (opts.check_convergence && grid.beta_gamma_points > 0) {
        int n_alpha = static_cast<int>(grid.points.size()) / grid.beta_gamma_points;
        auto fine = PowderGrid::uniform(2 * grid.beta_gamma_points, n_alpha);
        Spectrum finer = spectrum_of(powder_once(p, m, params, rotor, K, fine, fid_grid, opts.detection, opts.threads));
        r.doubling_change = relative_difference(base, finer);
        if (r.doubling_change > 1e-2) {
            std::ostringstream os;
            os << "powder grid not converged: doubling the orientations changes the spectrum by "
               << r.doubling_change;
            r.warning = os.str();
        }
    }
    r.spectrum = opts.broadening_hz > 0.0 ? lorentzian_broaden(base, opts.broadening_hz) : base;
    return r;
}

double imaginary_residue(const Spectrum& s)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.amplitude.size(); ++i)
        if (std::abs(s.amplitude[i]) > std::abs(s.amplitude[best]))
            best = i;
    if (std::abs(s.amplitude[best]) == 0.0)
        return 0.0;
    const cplx rot = std::conj(s.amplitude[best]) / std::abs(s.amplitude[best]);
    double re = 0.0, im = 0.0;
    for (const auto& a : s.amplitude) {
        cplx v = a * rot;
        re = std::max(re, std::abs(v.real()));
        im = std::max(im, std::abs(v.imag()));
    }
    return im / re;
}

int powder_truncation(const SpinParams& params, const RotorConfig& rotor, double tol)
{
    // A_n does not depend on alpha; beta and gamma cover their symmetry cells
    int K = 0;
    for (int ib = 0; ib <= 18; ++ib)
        for (int ig = 0; ig < 18; ++ig) {
            SpinParams q = params;
            q.alpha = 0.0;
            q.beta = 0.5 * kPi * ib / 18.0;
            q.gamma = kPi * ig / 18.0;
            K = std::max(K, adaptive_truncation(q, rotor, tol));
        }
    return K;
}

double relative_difference(const Spectrum& a, const Spectrum& b)
{
    if (a.amplitude.size() != b.amplitude.size())
        throw InvalidArgument("spectra have different lengths");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.amplitude.size(); ++i) {
        num = std::max(num, std::abs(a.amplitude[i] - b.amplitude[i]));
        den = std::max(den, std::abs(b.amplitude[i]));
    }
    return den == 0.0 ? num : num / den;
}

std::vector<LibraryEntry> reference_library(const SpinParams& params, const RotorConfig& rotor, int K,
                                            const FidGrid& grid, double broadening_hz, const PowderGrid* powder,
                                            int threads)
{
    std::vector<LibraryEntry> lib;
    for (int m = -K; m <= K; ++m)
        for (int p = 0; p < 2; ++p) {
            if (powder) {
                PowderOptions o;
                o.broadening_hz = broadening_hz;
                o.threads = threads;
                lib.push_back({{p, m}, powder_spectrum(p, m, params, rotor, K, *powder, grid, o).spectrum});
            } else {
                lib.push_back({{p, m}, spectrum_of(analytic_fid(p, m, params, rotor, K, Detection::quadrature, grid),
                                                   broadening_hz)});
            }
        }
    return lib;
}

Identification identify_state(const Spectrum& s, const std::vector<LibraryEntry>& library)
{
    if (library.size() < 2)
        throw InvalidArgument("reference library needs at least two entries");
    auto norm = [](const std::vector<cplx>& v) {
        double acc = 0.0;
        for (const auto& x : v)
            acc += std::norm(x);
        return std::sqrt(acc);
    };
    const double ns = norm(s.amplitude);
    std::vector<double> score(library.size());
    for (std::size_t e = 0; e < library.size(); ++e) {
        const auto& ref = library[e].spectrum.amplitude;
        if (ref.size() != s.amplitude.size())
            throw InvalidArgument("library spectrum length does not match the measured spectrum");
        cplx dot = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            dot += std::conj(ref[i]) * s.amplitude[i];
        const double d = ns * norm(ref);
        score[e] = d == 0.0 ? 0.0 : dot.real() / d;
    }
    std::vector<std::size_t> order(library.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    Identification id{library[order[0]].label, score[order[0]], score[order[0]] - score[order[1]]};
    if (id.margin < 0.1) {
        std::ostringstream os;
        os << "ambiguous readout: best match " << to_string(id.label) << " (" << score[order[0]] << ") vs "
           << to_string(library[order[1]].label) << " (" << score[order[1]]
           << "); increase K or reduce broadening";
        throw ScientificFailure(os.str());
    }
    return id;
}

namespace {

void write_rows(std::ostream& os, const char* header, const std::vector<double>& x, const std::vector<cplx>& y)
{
    os << header << '\n';
    os << std::setprecision(12);
    for (std::size_t i = 0; i < x.size(); ++i)
        os << x[i] << ',' << y[i].real() << ',' << y[i].imag() << '\n';
}

void read_rows(std::istream& is, const std::string& header, std::vector<double>& x, std::vector<cplx>& y)
{
    std::string line;
    if (!std::getline(is, line) || line != header)
        throw InvalidArgument("CSV header must be '" + header + "'");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw InvalidArgument("CSV line " + std::to_string(lineno) + ": expected three columns");
        try {
            x.push_back(std::stod(a));
            y.emplace_back(std::stod(b), std::stod(c));
        } catch (const std::logic_error&) {
            throw InvalidArgument("CSV line " + std::to_string(lineno) + ": not a number");
        }
    }
}

}  // namespace

void write_spectrum_csv(std::ostream& os, const Spectrum& s)
{
    write_rows(os, "frequency_hz,re,im", s.frequency_hz, s.amplitude);
}

void write_fid_csv(std::ostream& os, const FidTrace& fid)
{
    std::vector<double> t(fid.samples.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = fid.time(i);
    write_rows(os, "time_s,re,im", t, fid.samples);
}

Spectrum read_spectrum_csv(std::istream& is)
{
    Spectrum s;
    read_rows(is, "frequency_hz,re,im", s.frequency_hz, s.amplitude);
    return s;
}

FidTrace read_fid_csv(std::istream& is)
{
    FidTrace f;
    std::vector<double> t;
    read_rows(is, "time_s,re,im", t, f.samples);
    if (t.size() >= 2)
        f.dwell = t[1] - t[0];
    return f;
}

}  // namespace fqc
