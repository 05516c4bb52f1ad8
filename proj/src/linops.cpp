#include "ctxsep/linops.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "ctxsep/errors.hpp"

namespace ctxsep {

LinearOperatorDescriptor LinearOperatorDescriptor::smoothing_band(int n) {
    if (n < 0) throw DomainError("SmoothingBand width must be >= 0");
    return {Kind::SmoothingBand, n};
}

LinearOperatorDescriptor LinearOperatorDescriptor::block_sum(int w) {
    if (w < 1) throw DomainError("BlockSum window must be >= 1");
    return {Kind::BlockSum, w};
}

int operator_output_dim(const LinearOperatorDescriptor& op, int T) {
    if (T < 1) throw DimensionMismatch("operator input length must be >= 1");
    switch (op.kind) {
        case LinearOperatorDescriptor::Kind::Identity:
            return T;
        case LinearOperatorDescriptor::Kind::Diff:
            if (T < 2) throw DimensionMismatch("Diff needs at least 2 samples");
            return T - 1;
        case LinearOperatorDescriptor::Kind::SmoothingBand:
            return T;
        case LinearOperatorDescriptor::Kind::BlockSum:
            if (T % op.param != 0)
                throw IndivisibleWindow("BlockSum window " + std::to_string(op.param) +
                                        " does not divide T=" + std::to_string(T));
            return T / op.param;
    }
    throw DomainError("unknown operator kind");
}

Vector apply(const LinearOperatorDescriptor& op, const Vector& x) {
    const int T = static_cast<int>(x.size());
    const int m = operator_output_dim(op, T);
    switch (op.kind) {
        case LinearOperatorDescriptor::Kind::Identity:
            return x;
        case LinearOperatorDescriptor::Kind::Diff: {
            Vector out(m);
            for (int t = 0; t < m; ++t) out[t] = x[t + 1] - x[t];
            return out;
        }
        case LinearOperatorDescriptor::Kind::SmoothingBand: {
            Vector out(m);
            const int n = op.param;
            for (int t = 0; t < T; ++t) {
                const int hi = std::min(t + n, T - 1);
                double s = 0.0;
                for (int j = t; j <= hi; ++j) s += x[j];
                out[t] = s;
            }
            return out;
        }
        case LinearOperatorDescriptor::Kind::BlockSum: {
            Vector out(m);
            const int w = op.param;
            for (int b = 0; b < m; ++b) out[b] = x.segment(b * w, w).sum();
            return out;
        }
    }
    throw DomainError("unknown operator kind");
}

Vector apply_transpose(const LinearOperatorDescriptor& op, const Vector& v, int T) {
    const int m = operator_output_dim(op, T);
    if (static_cast<int>(v.size()) != m)
        throw DimensionMismatch("adjoint input has length " + std::to_string(v.size()) +
                                ", operator output dimension is " + std::to_string(m));
    switch (op.kind) {
        case LinearOperatorDescriptor::Kind::Identity:
            return v;
        case LinearOperatorDescriptor::Kind::Diff: {
            Vector out = Vector::Zero(T);
            for (int t = 0; t < m; ++t) {
                out[t] -= v[t];
                out[t + 1] += v[t];
            }
            return out;
        }
        case LinearOperatorDescriptor::Kind::SmoothingBand: {
            Vector out(T);
            const int n = op.param;
            for (int t = 0; t < T; ++t) {
                const int lo = std::max(0, t - n);
                double s = 0.0;
                for (int j = lo; j <= t; ++j) s += v[j];
                out[t] = s;
            }
            return out;
        }
        case LinearOperatorDescriptor::Kind::BlockSum: {
            Vector out(T);
            const int w = op.param;
            for (int t = 0; t < T; ++t) out[t] = v[t / w];
            return out;
        }
    }
    throw DomainError("unknown operator kind");
}

SparseMat operator_matrix(const LinearOperatorDescriptor& op, int T) {
    const int m = operator_output_dim(op, T);
    SparseMat A(m, T);
    std::vector<Eigen::Triplet<double>> trips;
    switch (op.kind) {
        case LinearOperatorDescriptor::Kind::Identity:
            A.setIdentity();
            return A;
        case LinearOperatorDescriptor::Kind::Diff:
            trips.reserve(2 * static_cast<std::size_t>(m));
            for (int t = 0; t < m; ++t) {
                trips.emplace_back(t, t, -1.0);
                trips.emplace_back(t, t + 1, 1.0);
            }
            break;
        case LinearOperatorDescriptor::Kind::SmoothingBand:
            for (int t = 0; t < T; ++t) {
                const int hi = std::min(t + op.param, T - 1);
                for (int j = t; j <= hi; ++j) trips.emplace_back(t, j, 1.0);
            }
            break;
        case LinearOperatorDescriptor::Kind::BlockSum:
            trips.reserve(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) trips.emplace_back(t / op.param, t, 1.0);
            break;
    }
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

std::string operator_name(const LinearOperatorDescriptor& op) {
    switch (op.kind) {
        case LinearOperatorDescriptor::Kind::Identity:
            return "identity";
        case LinearOperatorDescriptor::Kind::Diff:
            return "diff";
        case LinearOperatorDescriptor::Kind::SmoothingBand:
            return "smooth:" + std::to_string(op.param);
        case LinearOperatorDescriptor::Kind::BlockSum:
            return "blocksum:" + std::to_string(op.param);
    }
    throw DomainError("unknown operator kind");
}

LinearOperatorDescriptor parse_operator(const std::string& name) {
    if (name == "identity") return LinearOperatorDescriptor::identity();
    if (name == "diff") return LinearOperatorDescriptor::diff();
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string head = name.substr(0, colon);
        const std::string arg = name.substr(colon + 1);
        int value = 0;
        try {
            std::size_t pos = 0;
            value = std::stoi(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ParseError("bad operator parameter in '" + name + "'");
        }
        if (head == "smooth") return LinearOperatorDescriptor::smoothing_band(value);
        if (head == "blocksum") return LinearOperatorDescriptor::block_sum(value);
    }
    throw ParseError("unknown operator '" + name + "'");
}

Matrix rbf_features(const Vector& temps_f, const TemperatureSide& side,
                    const Vector& centers_f, double bandwidth_f) {
    if (!(bandwidth_f > 0.0)) throw DomainError("rbf bandwidth must be > 0");
    if (centers_f.size() == 0) throw DomainError("rbf centers must be nonempty");
    if (!temps_f.allFinite()) throw NonFinite("temperatures contain NaN/Inf");

    const auto T = temps_f.size();
    const auto m = centers_f.size();
    Matrix out = Matrix::Zero(T, m);
    const double inv_two_bw2 = 1.0 / (2.0 * bandwidth_f * bandwidth_f);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double temp = temps_f[t];
        const bool active = side.kind == TemperatureSide::Kind::Above
                                ? temp > side.threshold_f
                                : temp < side.threshold_f;
        if (!active) continue;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double d = temp - centers_f[j];
            out(t, j) = std::exp(-d * d * inv_two_bw2);
        }
    }
    return out;
}

Matrix hour_features(const std::vector<std::int64_t>& timestamps) {
    const auto T = static_cast<Eigen::Index>(timestamps.size());
    if (T == 0) throw DimensionMismatch("hour_features needs at least one timestamp");
    for (std::size_t t = 1; t < timestamps.size(); ++t) {
        if (timestamps[t] - timestamps[t - 1] != 3600)
            throw NonHourly("timestamp gap of " + std::to_string(timestamps[t] - timestamps[t - 1]) +
                            "s at row " + std::to_string(t) + " (need exactly 3600s)");
    }
    Matrix out = Matrix::Zero(T, 24);
    for (Eigen::Index t = 0; t < T; ++t) {
        // Timestamps are local standard time as epoch seconds, so the epoch
        // is midnight-aligned and hour-of-day is a plain modulus.
        const std::int64_t hours = timestamps[static_cast<std::size_t>(t)] / 3600;
        const int hour = static_cast<int>(((hours % 24) + 24) % 24);
        out(t, hour) = 1.0;
    }
    return out;
}

}  // namespace ctxsep
