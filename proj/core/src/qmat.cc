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

#include "opq/qmat.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace opq {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

size_t checked_dim(size_t num_qubits) {
    if (num_qubits > 24) {
        throw std::length_error("register of " + std::to_string(num_qubits) + " qubits is beyond desk scale");
    }
    return size_t{1} << num_qubits;
}

// Bit position (from the least significant end) of qubit `index` in an n-qubit register.
inline size_t bit_of(size_t index, size_t n) {
    return n - 1 - index;
}

std::vector<size_t> target_bits(const DensityState &state, const std::vector<Tag> &targets) {
    std::vector<size_t> bits;
    bits.reserve(targets.size());
    for (const auto &t : targets) {
        size_t b = bit_of(state.index_of(t), state.num_qubits());
        if (std::find(bits.begin(), bits.end(), b) != bits.end()) {
            throw std::invalid_argument("repeated gate target '" + t + "'");
        }
        bits.push_back(b);
    }
    return bits;
}

bool is_diagonal(const ComplexMatrix &m) {
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            if (r != c && m(r, c) != Complex(0, 0)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

double Angle::radians() const {
    return eighths_ * std::numbers::pi / 4.0;
}

std::string Angle::str() const {
    return std::to_string(eighths_);
}

DensityState::DensityState() : tags_(), matrix_(ComplexMatrix::Identity(1, 1)) {
}

DensityState::DensityState(std::vector<Tag> tags, ComplexMatrix matrix) : tags_(std::move(tags)), matrix_(std::move(matrix)) {
    size_t dim = checked_dim(tags_.size());
    if ((size_t)matrix_.rows() != dim || (size_t)matrix_.cols() != dim) {
        throw std::invalid_argument(
            "matrix is " + std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()) + " but " +
            std::to_string(tags_.size()) + " tags need " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    std::set<Tag> seen;
    for (const auto &t : tags_) {
        if (!seen.insert(t).second) {
            throw std::invalid_argument("duplicate tag '" + t + "'");
        }
    }
}

DensityState DensityState::basis(const Tag &tag, int bit) {
    if (bit != 0 && bit != 1) {
        throw std::invalid_argument("basis bit must be 0 or 1");
    }
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(bit, bit) = 1;
    return DensityState({tag}, m);
}

DensityState DensityState::plus(const Tag &tag, Angle theta) {
    return plus_real(tag, theta.radians());
}

DensityState DensityState::plus_real(const Tag &tag, double theta) {
    ComplexVector v(2);
    v << kInvSqrt2, std::polar(kInvSqrt2, theta);
    return pure({tag}, v);
}

DensityState DensityState::maximally_mixed(const Tag &tag) {
    return DensityState({tag}, ComplexMatrix::Identity(2, 2) * 0.5);
}

DensityState DensityState::maximally_mixed(const std::vector<Tag> &tags) {
    size_t dim = checked_dim(tags.size());
    return DensityState(tags, ComplexMatrix::Identity(dim, dim) / (double)dim);
}

DensityState DensityState::pure(std::vector<Tag> tags, const ComplexVector &amplitudes) {
    double norm = amplitudes.norm();
    if (std::abs(norm - 1) > kTolerance) {
        throw std::invalid_argument("state vector is not normalized");
    }
    return DensityState(std::move(tags), amplitudes * amplitudes.adjoint());
}

DensityState DensityState::bell_pair(const Tag &a, const Tag &b) {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = kInvSqrt2;
    v(3) = kInvSqrt2;
    return pure({a, b}, v);
}

bool DensityState::has(const Tag &tag) const {
    return std::find(tags_.begin(), tags_.end(), tag) != tags_.end();
}

size_t DensityState::index_of(const Tag &tag) const {
    auto it = std::find(tags_.begin(), tags_.end(), tag);
    if (it == tags_.end()) {
        throw std::out_of_range("unknown qubit tag '" + tag + "'");
    }
    return (size_t)(it - tags_.begin());
}

double DensityState::trace() const {
    return matrix_.trace().real();
}

bool DensityState::is_valid() const {
    if (!approx_equal(matrix_, matrix_.adjoint())) {
        return false;
    }
    if (std::abs(matrix_.trace() - Complex(1, 0)) > kTolerance) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -kTolerance;
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); r++) {
        for (Eigen::Index c = 0; c < a.cols(); c++) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

DensityState tensor(const DensityState &a, const DensityState &b) {
    for (const auto &t : b.tags()) {
        if (a.has(t)) {
            throw std::invalid_argument("tensor: duplicate tag '" + t + "'");
        }
    }
    std::vector<Tag> tags = a.tags();
    tags.insert(tags.end(), b.tags().begin(), b.tags().end());
    return DensityState(std::move(tags), kron(a.matrix(), b.matrix()));
}

DensityState apply_gate(const DensityState &state, const ComplexMatrix &gate, const std::vector<Tag> &targets) {
    size_t k = targets.size();
    if (k == 0) {
        throw std::invalid_argument("gate needs at least one target");
    }
    if ((size_t)gate.rows() != (size_t{1} << k) || gate.rows() != gate.cols()) {
        throw std::invalid_argument("gate dimension does not match " + std::to_string(k) + " targets");
    }
    if (!is_unitary(gate)) {
        throw std::invalid_argument("gate is not unitary");
    }
    std::vector<size_t> bits = target_bits(state, targets);
    size_t dim = state.dim();
    size_t gdim = size_t{1} << k;

    // offsets[g] = basis-index contribution of gate index g; target 0 is the gate's high bit.
    std::vector<size_t> offsets(gdim, 0);
    size_t mask = 0;
    for (size_t g = 0; g < gdim; g++) {
        for (size_t j = 0; j < k; j++) {
            if ((g >> (k - 1 - j)) & 1) {
                offsets[g] |= size_t{1} << bits[j];
            }
        }
    }
    for (size_t b : bits) {
        mask |= size_t{1} << b;
    }

    ComplexMatrix rho = state.matrix();
    if (is_diagonal(gate)) {
        std::vector<Complex> phase(dim);
        for (size_t i = 0; i < dim; i++) {
            size_t g = 0;
            for (size_t j = 0; j < k; j++) {
                g = (g << 1) | ((i >> bits[j]) & 1);
            }
            phase[i] = gate(g, g);
        }
        for (size_t c = 0; c < dim; c++) {
            Complex pc = std::conj(phase[c]);
            for (size_t r = 0; r < dim; r++) {
                rho(r, c) *= phase[r] * pc;
            }
        }
        return DensityState(state.tags(), std::move(rho));
    }

    std::vector<Complex> in(gdim), out(gdim);
    // Left multiplication: rho <- G rho, column by column.
    for (size_t c = 0; c < dim; c++) {
        for (size_t base = 0; base < dim; base++) {
            if (base & mask) {
                continue;
            }
            for (size_t g = 0; g < gdim; g++) {
                in[g] = rho(base | offsets[g], c);
            }
            for (size_t g = 0; g < gdim; g++) {
                Complex acc = 0;
                for (size_t h = 0; h < gdim; h++) {
                    acc += gate(g, h) * in[h];
                }
                out[g] = acc;
            }
            for (size_t g = 0; g < gdim; g++) {
                rho(base | offsets[g], c) = out[g];
            }
        }
    }
    // Right multiplication: rho <- rho G^dagger, row by row.
    for (size_t r = 0; r < dim; r++) {
        for (size_t base = 0; base < dim; base++) {
            if (base & mask) {
                continue;
            }
            for (size_t g = 0; g < gdim; g++) {
                in[g] = rho(r, base | offsets[g]);
            }
            for (size_t g = 0; g < gdim; g++) {
                Complex acc = 0;
                for (size_t h = 0; h < gdim; h++) {
                    acc += in[h] * std::conj(gate(g, h));
                }
                out[g] = acc;
            }
            for (size_t g = 0; g < gdim; g++) {
                rho(r, base | offsets[g]) = out[g];
            }
        }
    }
    return DensityState(state.tags(), std::move(rho));
}

DensityState partial_trace(const DensityState &state, const Tag &tag) {
    size_t n = state.num_qubits();
    size_t bit = bit_of(state.index_of(tag), n);
    size_t low = (size_t{1} << bit) - 1;
    size_t half = state.dim() / 2;
    const ComplexMatrix &rho = state.matrix();
    ComplexMatrix out(half, half);
    auto expand = [&](size_t i, size_t v) {
        return ((i & ~low) << 1) | (v << bit) | (i & low);
    };
    for (size_t c = 0; c < half; c++) {
        for (size_t r = 0; r < half; r++) {
            out(r, c) = rho(expand(r, 0), expand(c, 0)) + rho(expand(r, 1), expand(c, 1));
        }
    }
    std::vector<Tag> tags = state.tags();
    tags.erase(tags.begin() + state.index_of(tag));
    return DensityState(std::move(tags), std::move(out));
}

DensityState partial_trace(const DensityState &state, const std::vector<Tag> &tags) {
    DensityState out = state;
    for (const auto &t : tags) {
        out = partial_trace(out, t);
    }
    return out;
}

DensityState reduce_to(const DensityState &state, const std::vector<Tag> &keep) {
    std::vector<Tag> drop;
    for (const auto &t : state.tags()) {
        if (std::find(keep.begin(), keep.end(), t) == keep.end()) {
            drop.push_back(t);
        }
    }
    for (const auto &t : keep) {
        state.index_of(t);
    }
    return reorder(partial_trace(state, drop), keep);
}

DensityState reorder(const DensityState &state, const std::vector<Tag> &order) {
    size_t n = state.num_qubits();
    if (order.size() != n) {
        throw std::invalid_argument("reorder needs a permutation of the register tags");
    }
    if (order == state.tags()) {
        return state;
    }
    // src_bit[j] = bit in the old index of the qubit now at position j.
    std::vector<size_t> src_bit(n);
    for (size_t j = 0; j < n; j++) {
        src_bit[j] = bit_of(state.index_of(order[j]), n);
    }
    size_t dim = state.dim();
    std::vector<size_t> map(dim);
    for (size_t i = 0; i < dim; i++) {
        size_t old = 0;
        for (size_t j = 0; j < n; j++) {
            if ((i >> bit_of(j, n)) & 1) {
                old |= size_t{1} << src_bit[j];
            }
        }
        map[i] = old;
    }
    const ComplexMatrix &rho = state.matrix();
    ComplexMatrix out(dim, dim);
    for (size_t c = 0; c < dim; c++) {
        for (size_t r = 0; r < dim; r++) {
            out(r, c) = rho(map[r], map[c]);
        }
    }
    return DensityState(order, std::move(out));
}

DensityState rename(const DensityState &state, const std::vector<Tag> &tags) {
    return DensityState(tags, state.matrix());
}

std::array<MeasurementBranch, 2> measure_xy(const DensityState &state, const Tag &tag, Angle delta) {
    return measure_xy_real(state, tag, delta.radians());
}

std::array<MeasurementBranch, 2> measure_xy_real(const DensityState &state, const Tag &tag, double delta) {
    size_t n = state.num_qubits();
    size_t index = state.index_of(tag);
    size_t bit = bit_of(index, n);
    size_t low = (size_t{1} << bit) - 1;
    size_t half = state.dim() / 2;
    const ComplexMatrix &rho = state.matrix();
    Complex e = std::polar(1.0, delta);
    std::vector<Tag> tags = state.tags();
    tags.erase(tags.begin() + index);
    auto expand = [&](size_t i, size_t v) {
        return ((i & ~low) << 1) | (v << bit) | (i & low);
    };

    std::array<MeasurementBranch, 2> result;
    for (int outcome = 0; outcome < 2; outcome++) {
        // <phi| = (<0| + conj(s e) <1|)/sqrt2 with s = +1 for outcome 0, -1 for outcome 1.
        Complex phi1 = outcome == 0 ? e : -e;
        ComplexMatrix out(half, half);
        for (size_t c = 0; c < half; c++) {
            size_t c0 = expand(c, 0), c1 = expand(c, 1);
            for (size_t r = 0; r < half; r++) {
                size_t r0 = expand(r, 0), r1 = expand(r, 1);
                out(r, c) = 0.5 * (rho(r0, c0) + phi1 * rho(r0, c1) + std::conj(phi1) * rho(r1, c0) + rho(r1, c1));
            }
        }
        double p = out.trace().real();
        MeasurementBranch &branch = result[outcome];
        branch.outcome = outcome;
        branch.possible = p >= kZeroBranchThreshold;
        branch.probability = branch.possible ? p : 0.0;
        if (branch.possible) {
            branch.state = DensityState(tags, out / p);
        }
    }
    // Renormalize away any probability mass lost to the threshold.
    double total = result[0].probability + result[1].probability;
    if (total > 0) {
        result[0].probability /= total;
        result[1].probability /= total;
    }
    return result;
}

double purity_parameter(const DensityState &state) {
    const ComplexMatrix &rho = state.matrix();
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    double tr = rho.cwiseAbs2().sum();
    return std::log2(tr) + (double)state.num_qubits();
}

double trace_norm(const ComplexMatrix &hermitian) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    return 0.5 * trace_norm(a - b);
}

double trace_distance(const DensityState &a, const DensityState &b) {
    if (a.tags() != b.tags()) {
        return trace_distance(a.matrix(), reorder(b, a.tags()).matrix());
    }
    return trace_distance(a.matrix(), b.matrix());
}

bool is_unitary(const ComplexMatrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    ComplexMatrix id = ComplexMatrix::Identity(m.rows(), m.cols());
    return approx_equal(m * m.adjoint(), id, tol);
}

bool approx_equal(const ComplexMatrix &a, const ComplexMatrix &b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

bool approx_equal_up_to_phase(const ComplexMatrix &a, const ComplexMatrix &b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    Eigen::Index r, c;
    a.cwiseAbs().maxCoeff(&r, &c);
    if (std::abs(b(r, c)) < 1e-6) {
        return a.cwiseAbs().maxCoeff() <= tol && b.cwiseAbs().maxCoeff() <= tol;
    }
    Complex phase = a(r, c) / b(r, c);
    phase /= std::abs(phase);
    return approx_equal(a, phase * b, tol);
}

ComplexMatrix random_unitary(size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(dim, dim);
    for (size_t c = 0; c < dim; c++) {
        for (size_t r = 0; r < dim; r++) {
            g(r, c) = Complex(normal(rng), normal(rng));
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the distribution is Haar.
    for (size_t i = 0; i < dim; i++) {
        Complex d = rmat(i, i);
        double ad = std::abs(d);
        if (ad > 0) {
            q.col(i) *= d / ad;
        }
    }
    return q;
}

ComplexMatrix random_density_matrix(size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(dim, dim);
    for (size_t c = 0; c < dim; c++) {
        for (size_t r = 0; r < dim; r++) {
            g(r, c) = Complex(normal(rng), normal(rng));
        }
    }
    ComplexMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

namespace gates {

ComplexMatrix I() {
    return ComplexMatrix::Identity(2, 2);
}

ComplexMatrix X() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix Y() {
    ComplexMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

ComplexMatrix Z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

ComplexMatrix H() {
    ComplexMatrix m(2, 2);
    m << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
    return m;
}

ComplexMatrix Rz(double theta) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 1) = std::polar(1.0, theta);
    return m;
}

ComplexMatrix Rz(Angle theta) {
    return Rz(theta.radians());
}

ComplexMatrix T() {
    return Rz(Angle(1));
}

ComplexMatrix CZ() {
    ComplexMatrix m = ComplexMatrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
}

ComplexMatrix CNOT() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(2, 3) = 1;
    m(3, 2) = 1;
    return m;
}

}  // namespace gates

}  // namespace opq
