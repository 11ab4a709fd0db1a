#include "fqc/gates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fqc {

std::vector<FloquetIndex> default_working_states()
{
    return {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
}

namespace {

std::vector<int> rows_of(const std::vector<FloquetIndex>& states, ModeTruncation trunc)
{
    std::vector<int> rows;
    for (const auto& s : states) {
        if (s.p < 0 || s.p > 1 || std::abs(s.n) > trunc.K)
            throw InvalidArgument("working state " + to_string(s) + " outside the Floquet space with K=" +
                                  std::to_string(trunc.K));
        int r = flatten(s, trunc);
        if (std::find(rows.begin(), rows.end(), r) != rows.end())
            throw InvalidArgument("working state " + to_string(s) + " listed twice");
        rows.push_back(r);
    }
    return rows;
}

void require_member(FloquetIndex s, const std::vector<FloquetIndex>& working)
{
    if (std::find(working.begin(), working.end(), s) == working.end())
        throw InvalidArgument("state " + to_string(s) + " is not one of the working states");
}

// i log W for a 2x2 unitary, so that exp(-i H) = W
Mat2 unitary_generator(const Mat2& w)
{
    Eigen::ComplexEigenSolver<Mat2> es(w);
    Mat2 v = es.eigenvectors();
    // eigenvectors of a normal matrix with distinct eigenvalues are orthogonal; orthonormalize for degenerate pairs
    Eigen::HouseholderQR<Mat2> qr(v);
    Mat2 q = qr.householderQ();
    Mat2 d = q.adjoint() * w * q;
    Mat2 h = Mat2::Zero();
    h(0, 0) = -std::arg(d(0, 0));
    h(1, 1) = -std::arg(d(1, 1));
    return q * h * q.adjoint();
}

}  // namespace

Mat subspace_matrix(const Mat& u, const std::vector<FloquetIndex>& states, ModeTruncation trunc)
{
    auto rows = rows_of(states, trunc);
    const int m = static_cast<int>(rows.size());
    Mat s(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            s(i, j) = u(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]);
    return s;
}

FloquetOperator lift(const Mat& sub, const std::vector<FloquetIndex>& states, ModeTruncation trunc, double omega_r)
{
    auto rows = rows_of(states, trunc);
    const int m = static_cast<int>(rows.size());
    if (sub.rows() != m || sub.cols() != m)
        throw InvalidArgument("subspace matrix does not match the number of working states");
    Mat u = Mat::Identity(trunc.dim(), trunc.dim());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            u(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]) = sub(i, j);
    return {u, trunc, omega_r};
}

FloquetOperator preparation_operator(FloquetIndex target, ModeTruncation trunc, double omega_r, FloquetIndex reference)
{
    Mat u = Mat::Identity(trunc.dim(), trunc.dim());
    if (target != reference) {
        int a = flatten(reference, trunc), b = flatten(target, trunc);
        u(a, a) = 0.0;
        u(b, b) = 0.0;
        u(a, b) = 1.0;
        u(b, a) = 1.0;
    }
    return {u, trunc, omega_r};
}

PrepOperators default_prep_operators(const std::vector<FloquetIndex>& states, ModeTruncation trunc, double omega_r)
{
    PrepOperators ops;
    for (const auto& s : states)
        ops.emplace(s, preparation_operator(s, trunc, omega_r));
    return ops;
}

FloquetOperator state_transfer_unitary(FloquetIndex from, FloquetIndex to, const PrepOperators& prep,
                                       const std::vector<FloquetIndex>& working)
{
    require_member(from, working);
    require_member(to, working);
    auto pf = prep.find(from), pt = prep.find(to);
    if (pf == prep.end() || pt == prep.end())
        throw InvalidArgument("no preparation operator for " + to_string(pf == prep.end() ? from : to));
    const ModeTruncation tr = pf->second.trunc;
    for (const auto* op : {&pf->second, &pt->second}) {
        Eigen::JacobiSVD<Mat> svd(subspace_matrix(op->matrix, working, tr));
        if (svd.singularValues().minCoeff() < 1e-9)
            throw InvalidArgument("preparation operator is singular on the working subspace");
    }
    Mat inv = pf->second.matrix.partialPivLu().inverse();
    return {pt->second.matrix * inv, tr, pf->second.omega_r};
}

std::vector<FloquetOperator> peak_manipulation_basis(const std::vector<FloquetIndex>& states, int M,
                                                     ModeTruncation trunc, double omega_r, bool strict)
{
    const int L = static_cast<int>(states.size());
    if (M < 1)
        throw InvalidArgument("subspace dimension M must be >= 1");
    if (strict && L < M + 1) {
        std::ostringstream os;
        os << "an " << M << "x" << M << " unitary needs " << M + 1 << " Floquet states, got " << L;
        throw InvalidArgument(os.str());
    }
    auto rows = rows_of(states, trunc);
    const int used = std::min(L, M);
    std::vector<FloquetOperator> basis;
    for (int i = 0; i < used; ++i)
        for (int j = 0; j < used; ++j) {
            Mat e = Mat::Zero(trunc.dim(), trunc.dim());
            e(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(j)]) = 1.0;
            basis.push_back({e, trunc, omega_r});
        }
    return basis;
}

BasisExpansion expand_in_basis(const Mat& target, const std::vector<FloquetOperator>& basis,
                               const std::vector<FloquetIndex>& states)
{
    const int M = static_cast<int>(target.rows());
    if (basis.empty())
        throw InvalidArgument("empty operator basis");
    if (static_cast<int>(states.size()) < M)
        throw InvalidArgument("fewer states than the target dimension");
    std::vector<FloquetIndex> sub(states.begin(), states.begin() + M);
    Mat a(M * M, static_cast<Eigen::Index>(basis.size()));
    for (size_t b = 0; b < basis.size(); ++b) {
        Mat s = subspace_matrix(basis[b].matrix, sub, basis[b].trunc);
        a.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const Vec>(s.data(), M * M);
    }
    Vec rhs = Eigen::Map<const Vec>(target.data(), M * M);
    Vec x = a.completeOrthogonalDecomposition().solve(rhs);
    BasisExpansion out;
    out.coefficients.assign(x.data(), x.data() + x.size());
    out.residual = (a * x - rhs).cwiseAbs().maxCoeff();
    return out;
}

FloquetOperator hadamard_walsh(const std::vector<FloquetIndex>& working, ModeTruncation trunc, double omega_r)
{
    if (working.size() != 4)
        throw InvalidArgument("the Hadamard-Walsh transform needs exactly 4 working states");
    Mat h(4, 4);
    h << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
    return lift(h / 2.0, working, trunc, omega_r);
}

FloquetOperator conditional_flip(FloquetIndex marked, const std::vector<FloquetIndex>& working, ModeTruncation trunc,
                                 double omega_r)
{
    require_member(marked, working);
    const int n = static_cast<int>(working.size());
    Mat d = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i)
        if (working[static_cast<size_t>(i)] == marked)
            d(i, i) = -1.0;
    return lift(d, working, trunc, omega_r);
}

FloquetOperator inversion_about_mean(const std::vector<FloquetIndex>& working, ModeTruncation trunc, double omega_r)
{
    if (working.size() != 4)
        throw InvalidArgument("inversion about the mean is defined on 4 working states");
    Mat u = Mat::Constant(4, 4, 0.5) - Mat::Identity(4, 4);
    return lift(u, working, trunc, omega_r);
}

std::string to_string(EventKind k)
{
    switch (k) {
    case EventKind::pulse: return "pulse";
    case EventKind::selective: return "selective";
    case EventKind::phase: return "phase";
    case EventKind::free_evolution: return "free_evolution";
    case EventKind::asl: return "ASL";
    default: return "ASL^-1";
    }
}

namespace {

struct AslParts {
    std::vector<double> delays;  // free evolution before each pulse, then the tail
    Mat pulse;
    FloquetEigensystem eig;
};

AslParts asl_parts(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc)
{
    auto sched = solve_pass_timings(5, 0.0);
    AslParts parts;
    double prev = 0.0;
    for (double pos : sched.positions) {
        parts.delays.push_back((pos - prev) / rotor.omega_r);
        prev = pos;
    }
    parts.delays.push_back((sched.theta_T - prev) / rotor.omega_r);
    parts.pulse = rf_floquet_propagator(RfPulse::ideal(kPi, RfPhase::x), rotor, trunc, false).matrix;
    parts.eig = diagonalize(cs_floquet_hamiltonian(params, rotor, trunc));
    return parts;
}

}  // namespace

GateEvent asl_block(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc)
{
    auto parts = asl_parts(params, rotor, trunc);
    Mat u = floquet_propagator(parts.eig, parts.delays[0]).matrix;
    double total = parts.delays[0];
    for (size_t q = 1; q < parts.delays.size(); ++q) {
        u = parts.pulse * u;
        u = floquet_propagator(parts.eig, parts.delays[q]).matrix * u;
        total += parts.delays[q];
    }
    return {EventKind::asl, "[ASL]", total, u};
}

GateEvent asl_inverse_block(const SpinParams& params, const RotorConfig& rotor, ModeTruncation trunc)
{
    // time-reversed order of the inverted elements
    auto parts = asl_parts(params, rotor, trunc);
    const size_t n = parts.delays.size();
    Mat u = floquet_propagator(parts.eig, parts.delays[n - 1]).matrix.adjoint();
    double total = parts.delays[n - 1];
    for (size_t q = n - 1; q-- > 0;) {
        u = parts.pulse.adjoint() * u;
        u = floquet_propagator(parts.eig, parts.delays[q]).matrix.adjoint() * u;
        total += parts.delays[q];
    }
    return {EventKind::asl_inverse, "[ASL]^-1", total, u};
}

GateBlock compile_gate(const Mat& target, const std::vector<FloquetIndex>& working, const SpinParams& params,
                       const RotorConfig& rotor, ModeTruncation trunc, const CompileOptions& opts)
{
    const int M = static_cast<int>(working.size());
    if (target.rows() != M || target.cols() != M)
        throw InvalidArgument("gate target does not match the working space");
    if (unitarity_defect(target) > 1e-9)
        throw InvalidArgument("gate target is not unitary");
    if (!(opts.selective_omega1 > 0.0))
        throw InvalidArgument("selective pulse nutation rate must be positive");
    auto rows = rows_of(working, trunc);
    const int dim = trunc.dim();

    // Givens elimination: G_k ... G_1 U = D
    struct Factor {
        int a, b;
        Mat2 g;
    };
    std::vector<Factor> factors;
    Mat v = target;
    for (int c = 0; c < M - 1; ++c)
        for (int r = M - 1; r > c; --r) {
            cplx x = v(r - 1, c), y = v(r, c);
            double nrm = std::hypot(std::abs(x), std::abs(y));
            if (std::abs(y) < 1e-15)
                continue;
            Mat2 g;
            g << std::conj(x) / nrm, std::conj(y) / nrm, -y / nrm, x / nrm;
            Mat rows2 = v.middleRows(r - 1, 2);
            v.middleRows(r - 1, 2) = g * rows2;
            factors.push_back({r - 1, r, g});
        }

    GateBlock block;
    block.events.push_back(asl_block(params, rotor, trunc));
    block.events.push_back(asl_inverse_block(params, rotor, trunc));
    block.asl_cancellation =
        (block.events[1].unitary * block.events[0].unitary - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();

    // phase event first, then G_k^H ... G_1^H
    {
        Mat h = Mat::Zero(dim, dim);
        double top = 0.0;
        for (int i = 0; i < M; ++i) {
            double ph = -std::arg(v(i, i));
            h(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(i)]) = ph;
            top = std::max(top, std::abs(ph));
        }
        if (top > 0.0) {
            double t = top / opts.selective_omega1;
            block.events.push_back({EventKind::phase, "phase", t, expm_hermitian(Mat(h / t), t)});
        }
    }
    for (size_t f = factors.size(); f-- > 0;) {
        const auto& fa = factors[f];
        Mat2 h2 = unitary_generator(fa.g.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat2> es(h2);
        double angle = es.eigenvalues().cwiseAbs().maxCoeff();
        if (angle < 1e-15)
            continue;
        Mat h = Mat::Zero(dim, dim);
        int ra = rows[static_cast<size_t>(fa.a)], rb = rows[static_cast<size_t>(fa.b)];
        h(ra, ra) = h2(0, 0);
        h(ra, rb) = h2(0, 1);
        h(rb, ra) = h2(1, 0);
        h(rb, rb) = h2(1, 1);
        double t = angle / opts.selective_omega1;
        std::string label = "sel " + to_string(working[static_cast<size_t>(fa.a)]) + "<->" +
                            to_string(working[static_cast<size_t>(fa.b)]);
        block.events.push_back({EventKind::selective, label, t, expm_hermitian(Mat(h / t), t)});
    }

    Mat u = Mat::Identity(dim, dim);
    for (const auto& e : block.events)
        u = e.unitary * u;
    block.net_unitary = {u, trunc, rotor.omega_r};
    return block;
}

int grover_iterations(int n_items)
{
    if (n_items < 1)
        throw InvalidArgument("number of items must be positive");
    if (n_items == 1)
        return 0;
    // optimal count for one marked item
    const double theta = std::asin(1.0 / std::sqrt(double(n_items)));
    return static_cast<int>(std::lround(kPi / (4.0 * theta) - 0.5));
}

Spectrum population_spectrum(const std::vector<double>& populations, const std::vector<FloquetIndex>& working,
                             const SpinParams& params, const RotorConfig& rotor, int K, const FidGrid& grid,
                             double broadening_hz)
{
    if (populations.size() != working.size())
        throw InvalidArgument("one population per working state expected");
    const double floor = *std::min_element(populations.begin(), populations.end());
    std::vector<Stick> sticks;
    for (size_t i = 0; i < working.size(); ++i) {
        double w = populations[i] - floor;
        if (w == 0.0)
            continue;
        for (auto st : analytic_sticks(working[i].p, working[i].n, params, rotor, K)) {
            st.amplitude *= w;
            sticks.push_back(st);
        }
    }
    return spectrum_of(synthesize_fid(sticks, Detection::quadrature, grid, rotor), broadening_hz);
}

GroverResult run_grover(const GroverInstance& inst, const SpinParams& params, const RotorConfig& rotor,
                        ModeTruncation trunc, const GroverOptions& opts)
{
    if (inst.n_items != 4 || inst.working.size() != 4)
        throw InvalidArgument("Grover search is implemented for N = 4 working states");
    if (inst.iterations < 1)
        throw InvalidArgument("iterations must be >= 1");
    require_member(inst.marked, inst.working);
    const double w = rotor.omega_r;
    const auto& ws = inst.working;

    FloquetOperator hw = hadamard_walsh(ws, trunc, w);
    FloquetOperator flip = conditional_flip(inst.marked, ws, trunc, w);
    FloquetOperator inv = inversion_about_mean(ws, trunc, w);

    GroverResult r;
    r.marked = inst.marked;
    if (opts.compiled) {
        for (const auto* g : {&hw, &flip, &inv}) {
            r.blocks.push_back(compile_gate(subspace_matrix(g->matrix, ws, trunc), ws, params, rotor, trunc));
        }
        hw = r.blocks[0].net_unitary;
        flip = r.blocks[1].net_unitary;
        inv = r.blocks[2].net_unitary;
    }
    Mat u = hw.matrix;
    for (int it = 0; it < inst.iterations; ++it)
        u = inv.matrix * flip.matrix * u;

    FloquetDensity sigma = make_pseudo_pure({ws[0], 1.0}, trunc);
    r.final_state = evolve(sigma, {u, trunc, w});
    for (const auto& s : ws) {
        int row = flatten(s, trunc);
        r.populations.push_back(r.final_state.matrix(row, row).real());
    }
    r.fidelity = r.final_state.matrix(flatten(inst.marked, trunc), flatten(inst.marked, trunc)).real();
    r.spectrum = population_spectrum(r.populations, ws, params, rotor, trunc.K, opts.grid, opts.broadening_hz);

    std::vector<LibraryEntry> lib;
    for (const auto& s : ws)
        lib.push_back({s, spectrum_of(analytic_fid(s.p, s.n, params, rotor, trunc.K, Detection::quadrature, opts.grid),
                                      opts.broadening_hz)});
    try {
        auto id = identify_state(r.spectrum, lib);
        r.identified = id.label;
        r.margin = id.margin;
    } catch (const ScientificFailure& e) {
        throw ScientificFailure(std::string("search failed: ") + e.what());
    }
    return r;
}

}  // namespace fqc
