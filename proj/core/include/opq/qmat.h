// Copyright 2026 The OPQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPQ_QMAT_H
#define OPQ_QMAT_H

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace opq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Tag = std::string;

/// Absolute tolerance for equality, unitarity and Hermiticity checks.
inline constexpr double kTolerance = 1e-9;
/// Entrywise tolerance for round-trip identities.
inline constexpr double kRoundTripTolerance = 1e-12;
/// Branches with probability below this are impossible and never renormalized.
inline constexpr double kZeroBranchThreshold = 1e-12;

/// An angle k*pi/4 stored as k mod 8.
class Angle {
   public:
    constexpr Angle() = default;
    constexpr explicit Angle(int eighths) : eighths_(((eighths % 8) + 8) % 8) {
    }

    constexpr int eighths() const {
        return eighths_;
    }
    double radians() const;

    constexpr Angle operator+(Angle other) const {
        return Angle(eighths_ + other.eighths_);
    }
    constexpr Angle operator-(Angle other) const {
        return Angle(eighths_ - other.eighths_);
    }
    constexpr Angle operator-() const {
        return Angle(-eighths_);
    }
    constexpr bool operator==(const Angle &other) const = default;
    constexpr auto operator<=>(const Angle &other) const = default;

    std::string str() const;

   private:
    int eighths_ = 0;
};

inline constexpr Angle kPiAngle{4};

/// Density matrix over an ordered list of tagged qubits. The first tag is the most
/// significant bit of the basis index.
class DensityState {
   public:
    DensityState();
    DensityState(std::vector<Tag> tags, ComplexMatrix matrix);

    static DensityState basis(const Tag &tag, int bit);
    static DensityState plus(const Tag &tag, Angle theta);
    static DensityState plus_real(const Tag &tag, double theta);
    static DensityState maximally_mixed(const Tag &tag);
    static DensityState maximally_mixed(const std::vector<Tag> &tags);
    static DensityState pure(std::vector<Tag> tags, const ComplexVector &amplitudes);
    /// Maximally entangled pair (|00> + |11>)/sqrt(2) on (a, b).
    static DensityState bell_pair(const Tag &a, const Tag &b);

    const std::vector<Tag> &tags() const {
        return tags_;
    }
    const ComplexMatrix &matrix() const {
        return matrix_;
    }
    size_t num_qubits() const {
        return tags_.size();
    }
    size_t dim() const {
        return (size_t)matrix_.rows();
    }
    bool has(const Tag &tag) const;
    size_t index_of(const Tag &tag) const;

    /// Hermitian, unit trace and PSD, all within kTolerance.
    bool is_valid() const;
    double trace() const;

   private:
    std::vector<Tag> tags_;
    ComplexMatrix matrix_;
};

struct MeasurementBranch {
    int outcome;
    double probability;
    bool possible;
    std::optional<DensityState> state;
};

DensityState tensor(const DensityState &a, const DensityState &b);
DensityState apply_gate(const DensityState &state, const ComplexMatrix &gate, const std::vector<Tag> &targets);
DensityState partial_trace(const DensityState &state, const Tag &tag);
DensityState partial_trace(const DensityState &state, const std::vector<Tag> &tags);
/// Keeps exactly the given tags, in the given order.
DensityState reduce_to(const DensityState &state, const std::vector<Tag> &keep);
DensityState reorder(const DensityState &state, const std::vector<Tag> &order);
DensityState rename(const DensityState &state, const std::vector<Tag> &tags);

/// Measures in {(|0> + e^{i d}|1>)/sqrt2, (|0> - e^{i d}|1>)/sqrt2}; outcome 0 is the "+" vector.
std::array<MeasurementBranch, 2> measure_xy(const DensityState &state, const Tag &tag, Angle delta);
std::array<MeasurementBranch, 2> measure_xy_real(const DensityState &state, const Tag &tag, double delta);

/// log2 Tr(rho^2) + n.
double purity_parameter(const DensityState &state);
double trace_norm(const ComplexMatrix &hermitian);
double trace_distance(const ComplexMatrix &a, const ComplexMatrix &b);
double trace_distance(const DensityState &a, const DensityState &b);

bool is_unitary(const ComplexMatrix &m, double tol = kTolerance);
bool approx_equal(const ComplexMatrix &a, const ComplexMatrix &b, double tol = kTolerance);
/// Equality up to a global phase.
bool approx_equal_up_to_phase(const ComplexMatrix &a, const ComplexMatrix &b, double tol = kTolerance);
ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);

ComplexMatrix random_unitary(size_t dim, std::mt19937_64 &rng);
ComplexMatrix random_density_matrix(size_t dim, std::mt19937_64 &rng);

namespace gates {
ComplexMatrix I();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
ComplexMatrix H();
/// diag(1, e^{i theta}).
ComplexMatrix Rz(double theta);
ComplexMatrix Rz(Angle theta);
/// diag(1, e^{i pi/4}).
ComplexMatrix T();
ComplexMatrix CZ();
/// Control is the first target.
ComplexMatrix CNOT();
}  // namespace gates

}  // namespace opq

#endif
