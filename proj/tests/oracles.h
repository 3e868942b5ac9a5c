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

// Independent reference computations used by the tests. Nothing here calls into the library
// except for plain data types, so agreement with the library is meaningful.

#ifndef OPQ_TESTS_ORACLES_H
#define OPQ_TESTS_ORACLES_H

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline const double kPi = 3.14159265358979323846;

inline Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// One flow step on a wire measured at angle k*pi/4: H diag(1, e^{-ia}).
inline Mat j_step(int eighths) {
    Mat h(2, 2);
    double r = 1 / std::sqrt(2.0);
    h << r, r, r, -r;
    Mat p = Mat::Identity(2, 2);
    p(1, 1) = std::polar(1.0, -eighths * kPi / 4);
    return h * p;
}

/// Single-qubit gate on wire `wire` (0-based, wire 0 most significant) of an n-wire register.
inline Mat on_wire(const Mat &g, int wire, int n) {
    Mat out = Mat::Identity(1, 1);
    for (int k = 0; k < n; k++) {
        out = kron(out, k == wire ? g : Mat::Identity(2, 2));
    }
    return out;
}

/// CZ between wires a and b of an n-wire register (diagonal).
inline Mat cz(int a, int b, int n) {
    Eigen::Index dim = Eigen::Index(1) << n;
    Mat out = Mat::Identity(dim, dim);
    for (Eigen::Index x = 0; x < dim; x++) {
        if (((x >> (n - 1 - a)) & 1) && ((x >> (n - 1 - b)) & 1)) {
            out(x, x) = -1;
        }
    }
    return out;
}

/// Whether column `col` of a brickwork state has a vertical edge between rows `row` and `row+1`.
/// Odd upper rows at columns 3, 5 mod 8; even upper rows at columns 7 mod 8 and the column two
/// later.
inline bool vertical_edge(int row, int col) {
    int c = col % 8;
    if (row % 2 == 1) {
        return c == 3 || c == 5;
    }
    return c == 7 || (c == 1 && col >= 9);
}

/// Circuit model of brickwork(w, d): for each column apply its vertical CZs, then (for measured
/// columns) a J step per wire. `angles[i][j]` is row i+1, column j+1 in eighths.
inline Mat brickwork_circuit(int w, int d, const std::vector<std::vector<int>> &angles) {
    Eigen::Index dim = Eigen::Index(1) << w;
    Mat u = Mat::Identity(dim, dim);
    for (int col = 1; col <= d; col++) {
        for (int row = 1; row < w; row++) {
            if (vertical_edge(row, col)) {
                u = cz(row - 1, row, w) * u;
            }
        }
        if (col < d) {
            for (int row = 1; row <= w; row++) {
                u = on_wire(j_step(angles[row - 1][col - 1]), row - 1, w) * u;
            }
        }
    }
    return u;
}

/// Equality up to a global phase, entrywise tolerance.
inline bool equal_up_to_phase(const Mat &a, const Mat &b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    Eigen::Index r = 0, c = 0;
    a.cwiseAbs().maxCoeff(&r, &c);
    if (std::abs(b(r, c)) < 1e-12) {
        return false;
    }
    C phase = a(r, c) / b(r, c);
    return (a - phase * b).cwiseAbs().maxCoeff() <= tol;
}

/// Small open graph on vertices 0..n-1 for exhaustive flow enumeration.
struct SmallGraph {
    int n = 0;
    std::vector<uint32_t> adj;
    uint32_t inputs = 0;
    uint32_t outputs = 0;
};

/// Flow witness: successor per vertex (-1 for outputs) and a level per vertex.
struct SmallFlow {
    std::vector<int> f;
    std::vector<int> level;
};

/// Flow existence by exhaustive search: every injective map from O^c into I^c with x ~ f(x), then
/// acyclicity of the precedence relation x < f(x), x < y for y ~ f(x), y != x, checked via the
/// subset criterion (every nonempty subset has a member with no predecessor inside it). Levels
/// come from peeling off sources.
inline std::optional<SmallFlow> find_small_flow(const SmallGraph &g) {
    int n = g.n;
    std::vector<int> domain;
    for (int v = 0; v < n; v++) {
        if (!((g.outputs >> v) & 1)) {
            domain.push_back(v);
        }
    }
    std::vector<int> f(n, -1);
    std::vector<uint32_t> pred(n);
    auto build_pred = [&]() {
        std::fill(pred.begin(), pred.end(), 0u);
        for (int x : domain) {
            int fx = f[x];
            pred[fx] |= 1u << x;
            for (int y = 0; y < n; y++) {
                if (((g.adj[fx] >> y) & 1) && y != x) {
                    pred[y] |= 1u << x;
                }
            }
        }
    };
    auto acyclic = [&]() {
        for (uint32_t subset = 1; subset < (1u << n); subset++) {
            bool has_source = false;
            for (int v = 0; v < n && !has_source; v++) {
                has_source = ((subset >> v) & 1) && !(pred[v] & subset);
            }
            if (!has_source) {
                return false;
            }
        }
        return true;
    };
    std::optional<SmallFlow> found;
    uint32_t image = 0;
    std::function<bool(size_t)> assign = [&](size_t k) -> bool {
        if (k == domain.size()) {
            build_pred();
            if (!acyclic()) {
                return false;
            }
            SmallFlow out{f, std::vector<int>(n, 0)};
            uint32_t left = (1u << n) - 1;
            for (int layer = 0; left; layer++) {
                uint32_t sources = 0;
                for (int v = 0; v < n; v++) {
                    if (((left >> v) & 1) && !(pred[v] & left)) {
                        sources |= 1u << v;
                        out.level[v] = layer;
                    }
                }
                left &= ~sources;
            }
            found = out;
            return true;
        }
        int x = domain[k];
        for (int y = 0; y < n; y++) {
            if (((g.adj[x] >> y) & 1) && !((g.inputs >> y) & 1) && !((image >> y) & 1)) {
                f[x] = y;
                image |= 1u << y;
                if (assign(k + 1)) {
                    return true;
                }
                image &= ~(1u << y);
                f[x] = -1;
            }
        }
        return false;
    };
    assign(0);
    return found;
}

/// Wilson score interval at z = 1.959964, straight from the textbook formula.
inline std::pair<double, double> wilson(double p, double n) {
    double z = 1.959964;
    double center = (p + z * z / (2 * n)) / (1 + z * z / n);
    double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
    return {center - half, center + half};
}

}  // namespace oracle

#endif
