#include "fqc/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fqc {

namespace {

constexpr double kHermTol = 1e-12;

}  // namespace

FloquetOperator assemble_floquet_hamiltonian(const FourierBlocks& blocks, double omega_r, ModeTruncation trunc)
{
    if (trunc.K < 0)
        throw InvalidArgument("truncation K must be non-negative");
    double scale = 1.0;
    for (const auto& [k, h] : blocks)
        scale = std::max(scale, h.cwiseAbs().maxCoeff());
    for (const auto& [k, h] : blocks) {
        auto it = blocks.find(-k);
        Mat2 partner = it == blocks.end() ? Mat2::Zero() : it->second;
        double defect = (h - partner.adjoint()).cwiseAbs().maxCoeff();
        if (defect > kHermTol * scale) {
            std::ostringstream os;
            os << "Fourier block at offset " << k << " is not the adjoint of offset " << -k
               << " (defect " << defect << ")";
            throw InvalidArgument(os.str());
        }
    }

    const int dim = trunc.dim();
    Mat h = Mat::Zero(dim, dim);
    for (int m = -trunc.K; m <= trunc.K; ++m) {
        for (int n = -trunc.K; n <= trunc.K; ++n) {
            auto it = blocks.find(m - n);
            if (it != blocks.end())
                h.block<2, 2>(2 * (m + trunc.K), 2 * (n + trunc.K)) = it->second;
        }
        h(2 * (m + trunc.K), 2 * (m + trunc.K)) += m * omega_r;
        h(2 * (m + trunc.K) + 1, 2 * (m + trunc.K) + 1) += m * omega_r;
    }
    // kill rounding asymmetry so the eigensolver sees an exactly Hermitian matrix
    h = 0.5 * (h + h.adjoint()).eval();
    return {h, trunc, omega_r};
}

FloquetEigensystem diagonalize(const FloquetOperator& h)
{
    if (hermitian_defect(h.matrix) > kHermTol * std::max(1.0, h.matrix.cwiseAbs().maxCoeff()))
        throw InvalidArgument("diagonalize: operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> solver(h.matrix);
    if (solver.info() != Eigen::Success)
        throw ScientificFailure("diagonalize: eigensolver did not converge");

    const int dim = static_cast<int>(h.matrix.rows());
    Eigen::VectorXd vals = solver.eigenvalues();
    Mat vecs = solver.eigenvectors();

    // phase-fix: largest component real positive
    std::vector<int> lead(dim);
    for (int c = 0; c < dim; ++c) {
        Eigen::Index r;
        vecs.col(c).cwiseAbs().maxCoeff(&r);
        lead[c] = static_cast<int>(r);
        cplx ph = vecs(r, c) / std::abs(vecs(r, c));
        vecs.col(c) /= ph;
    }

    FloquetEigensystem out;
    out.trunc = h.trunc;
    out.omega_r = h.omega_r;

    // tie-break inside degenerate clusters by leading component index
    const double degen_tol = 1e-10 * std::max(std::abs(h.omega_r), 1.0);
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    int start = 0;
    while (start < dim) {
        int end = start + 1;
        while (end < dim && vals(end) - vals(end - 1) <= degen_tol)
            ++end;
        if (end - start > 1) {
            out.degenerate = true;
            std::stable_sort(order.begin() + start, order.begin() + end,
                             [&](int a, int b) { return lead[a] < lead[b]; });
        }
        start = end;
    }

    out.eigenvalues.resize(dim);
    out.vectors.resize(dim, dim);
    out.folded.resize(dim);
    out.offsets.resize(dim);
    for (int i = 0; i < dim; ++i) {
        out.eigenvalues(i) = vals(order[i]);
        out.vectors.col(i) = vecs.col(order[i]);
    }

    const double w = h.omega_r;
    Eigen::VectorXd central(dim);
    const int r0 = 2 * h.trunc.K;
    for (int i = 0; i < dim; ++i) {
        double lam = out.eigenvalues(i);
        int n = w > 0 ? static_cast<int>(std::ceil(lam / w - 0.5)) : 0;
        out.folded(i) = lam - n * w;
        out.offsets(i) = n;
        central(i) = std::norm(out.vectors(r0, i)) + std::norm(out.vectors(r0 + 1, i));
    }

    // one quasi-energy per spin level: the eigenvectors living mostly on the central mode
    std::vector<int> idx(dim);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return central(a) > central(b); });
    std::vector<double> q{out.folded(idx[0]), out.folded(idx[1])};
    std::sort(q.begin(), q.end());
    out.quasi = Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    return out;
}

FloquetOperator floquet_propagator(const FloquetEigensystem& eig, double t)
{
    if (t < 0)
        throw InvalidArgument("floquet_propagator: t must be non-negative");
    if (eig.omega_r > 0 && t * eig.omega_r / kTwoPi > 1e6)
        throw InvalidArgument("floquet_propagator: t exceeds 1e6 rotor periods");
    const int dim = static_cast<int>(eig.eigenvalues.size());
    Vec ph(dim);
    for (int i = 0; i < dim; ++i)
        ph(i) = std::exp(-kI * eig.eigenvalues(i) * t);
    Mat u = eig.vectors * ph.asDiagonal() * eig.vectors.adjoint();
    return {u, eig.trunc, eig.omega_r};
}

Mat2 contract_propagator(const FloquetOperator& u, double t)
{
    return contract_propagator(u, t, 0.0);
}

Mat2 contract_propagator(const FloquetOperator& u, double t_b, double t_a)
{
    // u = exp(-i H_F (t_b - t_a)); the Floquet vector starts in the central mode at t_a
    (void)t_a;
    const int K = u.trunc.K;
    Mat2 out = Mat2::Zero();
    for (int n = -K; n <= K; ++n)
        out += std::exp(kI * double(n) * u.omega_r * t_b) * mode_block(u.matrix, u.trunc, n, 0);
    return out;
}

Mat2 expm_hermitian(const Mat2& h, double t)
{
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (h + h.adjoint()));
    Eigen::Vector2cd ph;
    for (int i = 0; i < 2; ++i)
        ph(i) = std::exp(-kI * es.eigenvalues()(i) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat expm_hermitian(const Mat& h, double t)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    Vec ph(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        ph(i) = std::exp(-kI * es.eigenvalues()(i) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat2 stepped_propagator_oracle(const std::function<Mat2(double)>& h_of_t, double t, int steps)
{
    return stepped_propagator_oracle(h_of_t, 0.0, t, steps);
}

Mat2 stepped_propagator_oracle(const std::function<Mat2(double)>& h_of_t, double t_a, double t_b, int steps)
{
    if (steps < 1)
        throw InvalidArgument("stepped oracle needs at least one step");
    const double dt = (t_b - t_a) / steps;
    Mat2 u = Mat2::Identity();
    for (int i = 0; i < steps; ++i) {
        Mat2 h = h_of_t(t_a + (i + 0.5) * dt);
        Mat2 step;
        if (std::abs(h(0, 1)) == 0.0 && std::abs(h(1, 0)) == 0.0) {
            step = Mat2::Zero();
            step(0, 0) = std::exp(-kI * h(0, 0).real() * dt);
            step(1, 1) = std::exp(-kI * h(1, 1).real() * dt);
        } else {
            step = expm_hermitian(h, dt);
        }
        u = step * u;
    }
    return u;
}

FloquetOperator formalize_observable(const FourierBlocks& components, ModeTruncation trunc, double omega_r,
                                     std::vector<std::string>* warnings)
{
    const int K = trunc.K;
    Mat a = Mat::Zero(trunc.dim(), trunc.dim());
    for (const auto& [k, blk] : components) {
        if (std::abs(k) > 2 * K) {
            if (warnings)
                warnings->push_back("component " + std::to_string(k) + " beyond +-2K dropped");
            continue;
        }
        for (int n = -K; n <= K; ++n) {
            int m = n - k;
            if (m < -K || m > K)
                continue;
            a.block<2, 2>(2 * (n + K), 2 * (m + K)) = blk;
        }
    }
    return {a, trunc, omega_r};
}

FloquetOperator detection_operator(const Mat2& d, double t, ModeTruncation trunc, double omega_r)
{
    const int K = trunc.K;
    Mat out = Mat::Zero(trunc.dim(), trunc.dim());
    for (int n = -K; n <= K; ++n)
        for (int j = -K; j <= K; ++j) {
            int m = j - n;
            out.block<2, 2>(2 * (n + K), 2 * (j + K)) = d * std::exp(-kI * double(m) * omega_r * t);
        }
    return {out, trunc, omega_r};
}

FloquetDensity evolve(const FloquetDensity& sigma, const FloquetOperator& u)
{
    if (sigma.matrix.rows() != u.matrix.rows())
        throw InvalidArgument("evolve: dimension mismatch (" + std::to_string(sigma.matrix.rows()) + " vs " +
                              std::to_string(u.matrix.rows()) + ")");
    FloquetDensity out = sigma;
    out.matrix = u.matrix * sigma.matrix * u.matrix.adjoint();
    out.label.reset();
    return out;
}

Mat2 hilbert_density(const Mat& sigma_f, ModeTruncation trunc, double omega_r, double t)
{
    Mat2 out = Mat2::Zero();
    for (int n = -trunc.K; n <= trunc.K; ++n)
        for (int m = -trunc.K; m <= trunc.K; ++m)
            out += mode_block(sigma_f, trunc, n, m) * std::exp(-kI * double(n - m) * omega_r * t);
    return out;
}

Mat2 mode_block(const Mat& x, ModeTruncation trunc, int n, int m)
{
    return x.block<2, 2>(2 * (n + trunc.K), 2 * (m + trunc.K));
}

Vec propagate(const FloquetEigensystem& eig, const Vec& phi, double t)
{
    Vec c = eig.vectors.adjoint() * phi;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) *= std::exp(-kI * eig.eigenvalues(i) * t);
    return eig.vectors * c;
}

Eigen::Vector2cd hilbert_state(const Vec& phi, ModeTruncation trunc, double omega_r, double t)
{
    Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
    for (int n = -trunc.K; n <= trunc.K; ++n)
        out += std::exp(kI * double(n) * omega_r * t) * phi.segment<2>(2 * (n + trunc.K));
    return out;
}

cplx floquet_expectation(const Mat2& d, const Mat& sigma_f, ModeTruncation trunc, double omega_r, double t)
{
    cplx acc = 0.0;
    for (int n = -trunc.K; n <= trunc.K; ++n)
        for (int m = -trunc.K; m <= trunc.K; ++m)
            acc += (d * mode_block(sigma_f, trunc, n, m)).trace() * std::exp(kI * double(n - m) * omega_r * t);
    return acc;
}

Mat embed(const Mat& x, ModeTruncation from, ModeTruncation to)
{
    if (to.K < from.K)
        throw InvalidArgument("embed: target truncation smaller than source");
    Mat out = Mat::Zero(to.dim(), to.dim());
    int off = 2 * (to.K - from.K);
    out.block(off, off, from.dim(), from.dim()) = x;
    return out;
}

}  // namespace fqc
