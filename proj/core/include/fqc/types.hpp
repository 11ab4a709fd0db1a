#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fqc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

// Bad input: caller supplied something the operation cannot accept.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input was fine but the numerics did not deliver (unconverged, unidentified, ...).
class ScientificFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModeTruncation {
    int K = 0;

    int modes() const { return 2 * K + 1; }
    int dim() const { return 2 * modes(); }
};

// p = 0 is |+1/2>, p = 1 is |-1/2>.
struct FloquetIndex {
    int p = 0;
    int n = 0;

    friend bool operator==(const FloquetIndex&, const FloquetIndex&) = default;
    friend auto operator<=>(const FloquetIndex&, const FloquetIndex&) = default;
};

inline int eps(int p) { return p == 0 ? -1 : 1; }

// mode-major, spin-minor, modes ascending
int flatten(FloquetIndex idx, ModeTruncation trunc);
FloquetIndex unflatten(int row, ModeTruncation trunc);

struct FloquetOperator {
    Mat matrix;
    ModeTruncation trunc;
    double omega_r = 0.0;
};

struct FloquetEigensystem {
    Eigen::VectorXd eigenvalues;   // ascending
    Mat vectors;                   // columns
    Eigen::VectorXd folded;        // eigenvalue folded into (-w/2, w/2]
    Eigen::VectorXi offsets;       // eigenvalue = folded + offset * w
    Eigen::VectorXd quasi;         // one q_r per spin level
    bool degenerate = false;
    ModeTruncation trunc;
    double omega_r = 0.0;
};

struct FloquetDensity {
    Mat matrix;
    ModeTruncation trunc;
    double alpha = 0.0;
    std::optional<FloquetIndex> label;
};

// spin-1/2 operators in the {|+1/2>, |-1/2>} basis
Mat2 spin_x();
Mat2 spin_y();
Mat2 spin_z();
Mat2 spin_plus();
Mat2 spin_minus();

double hermitian_defect(const Mat& m);  // max |m - m^H|
double unitarity_defect(const Mat& u);  // max |u u^H - I|

std::string to_string(FloquetIndex idx);

}  // namespace fqc
