#include "fqc/types.hpp"

namespace fqc {

int flatten(FloquetIndex idx, ModeTruncation trunc)
{
    if (idx.p < 0 || idx.p > 1 || idx.n < -trunc.K || idx.n > trunc.K)
        throw InvalidArgument("Floquet index " + to_string(idx) + " outside K=" + std::to_string(trunc.K));
    return 2 * (idx.n + trunc.K) + idx.p;
}

FloquetIndex unflatten(int row, ModeTruncation trunc)
{
    if (row < 0 || row >= trunc.dim())
        throw InvalidArgument("row " + std::to_string(row) + " outside Floquet dimension");
    return {row % 2, row / 2 - trunc.K};
}

Mat2 spin_x()
{
    Mat2 m;
    m << 0.0, 0.5, 0.5, 0.0;
    return m;
}

Mat2 spin_y()
{
    Mat2 m;
    m << 0.0, cplx(0, -0.5), cplx(0, 0.5), 0.0;
    return m;
}

Mat2 spin_z()
{
    Mat2 m;
    m << 0.5, 0.0, 0.0, -0.5;
    return m;
}

Mat2 spin_plus()
{
    Mat2 m;
    m << 0.0, 1.0, 0.0, 0.0;
    return m;
}

Mat2 spin_minus()
{
    Mat2 m;
    m << 0.0, 0.0, 1.0, 0.0;
    return m;
}

double hermitian_defect(const Mat& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const Mat& u)
{
    return (u * u.adjoint() - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

std::string to_string(FloquetIndex idx)
{
    return "(" + std::to_string(idx.p) + "," + std::to_string(idx.n) + ")";
}

}  // namespace fqc
