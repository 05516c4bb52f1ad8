#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>

namespace ctxsep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMat = Eigen::SparseMatrix<double>;

// The structured linear operators that losses and regularizers compose
// with. All are stateless value types:
//
//   Identity          x -> x
//   Diff              x -> (x_{t+1} - x_t), R^T -> R^{T-1}
//   SmoothingBand(n)  x -> sum_{j=t..min(t+n,T)} x_j, square T x T band
//                     with 1's on the diagonal and n superdiagonals
//                     (truncated at the end of the series)
//   BlockSum(w)       x -> per-block sums over consecutive non-overlapping
//                     windows of width w, R^T -> R^{T/w}; requires w | T
struct LinearOperatorDescriptor {
    enum class Kind { Identity, Diff, SmoothingBand, BlockSum };

    Kind kind = Kind::Identity;
    int param = 0;  // band width n or window w

    static LinearOperatorDescriptor identity() { return {Kind::Identity, 0}; }
    static LinearOperatorDescriptor diff() { return {Kind::Diff, 0}; }
    static LinearOperatorDescriptor smoothing_band(int n);
    static LinearOperatorDescriptor block_sum(int w);

    bool operator==(const LinearOperatorDescriptor&) const = default;
};

// Output dimension of `op` applied to a length-T vector. Throws
// DimensionMismatch / IndivisibleWindow when the operator cannot act on T.
int operator_output_dim(const LinearOperatorDescriptor& op, int T);

Vector apply(const LinearOperatorDescriptor& op, const Vector& x);

// Exact adjoint: <apply(op,x), v> == <x, apply_transpose(op,v)> for every
// x of length T and conforming v.
Vector apply_transpose(const LinearOperatorDescriptor& op, const Vector& v, int T);

// Sparse matrix realization of the operator on R^T (rows x T).
SparseMat operator_matrix(const LinearOperatorDescriptor& op, int T);

// Names used by the problem-spec JSON: "identity", "diff", "smooth:n",
// "blocksum:w".
std::string operator_name(const LinearOperatorDescriptor& op);
LinearOperatorDescriptor parse_operator(const std::string& name);

// Temperature gate for the radial basis features: Above(t) keeps rows with
// temp > t active, Below(t) keeps rows with temp < t active.
struct TemperatureSide {
    enum class Kind { Above, Below };
    Kind kind;
    double threshold_f;

    static TemperatureSide above(double t) { return {Kind::Above, t}; }
    static TemperatureSide below(double t) { return {Kind::Below, t}; }
};

// Gaussian radial basis features over temperature. Entry (t, j) is
// exp(-(temp_t - c_j)^2 / (2 bw^2)) when temp_t lies strictly on the active
// side of the threshold and 0 otherwise, so features are exactly inactive
// in mild weather.
Matrix rbf_features(const Vector& temps_f, const TemperatureSide& side,
                    const Vector& centers_f, double bandwidth_f);

// One-hot hour-of-day indicators (T x 24) for a strictly hourly timestamp
// grid given as epoch seconds. Throws NonHourly on any gap != 1h.
Matrix hour_features(const std::vector<std::int64_t>& timestamps);

}  // namespace ctxsep
