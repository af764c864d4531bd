// SPDX-License-Identifier: Apache-2.0
#include "evoforge/cells.hpp"

#include <cassert>
#include <cmath>

namespace evoforge {

namespace {

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

} // namespace

CellOutput cell_forward(NodeType type, std::span<const double> p, double x, double h_prev, double c_prev,
                        CellCache &cache) {
    assert(p.size() == param_count(type));
    auto &v = cache.v;
    switch (type) {
    case NodeType::Input: return {x, 0.0};
    case NodeType::Output: return {x + p[0], 0.0};
    case NodeType::Simple: {
        double h = std::tanh(x + p[0]);
        v[0] = h;
        return {h, 0.0};
    }
    case NodeType::UGRNN: {
        double g = sigmoid(p[0] * x + p[1] * h_prev + p[2]);
        double c = std::tanh(p[3] * x + p[4] * h_prev + p[5]);
        v[0] = g;
        v[1] = c;
        return {g * h_prev + (1.0 - g) * c, 0.0};
    }
    case NodeType::MGU: {
        double f = sigmoid(p[0] * x + p[1] * h_prev + p[2]);
        double c = std::tanh(p[3] * x + p[4] * (f * h_prev) + p[5]);
        v[0] = f;
        v[1] = c;
        return {(1.0 - f) * h_prev + f * c, 0.0};
    }
    case NodeType::GRU: {
        double z = sigmoid(p[0] * x + p[1] * h_prev + p[2]);
        double r = sigmoid(p[3] * x + p[4] * h_prev + p[5]);
        double c = std::tanh(p[6] * x + p[7] * (r * h_prev) + p[8]);
        v[0] = z;
        v[1] = r;
        v[2] = c;
        return {(1.0 - z) * h_prev + z * c, 0.0};
    }
    case NodeType::LSTM: {
        double i = sigmoid(p[0] * x + p[1] * h_prev + p[2]);
        double f = sigmoid(p[3] * x + p[4] * h_prev + p[5]);
        double o = sigmoid(p[6] * x + p[7] * h_prev + p[8]);
        double g = std::tanh(p[9] * x + p[10] * h_prev + p[11]);
        double c = f * c_prev + i * g;
        double tc = std::tanh(c);
        v[0] = i;
        v[1] = f;
        v[2] = o;
        v[3] = g;
        v[4] = tc;
        return {o * tc, c};
    }
    case NodeType::Delta: {
        double d = p[3] * h_prev;
        double z = std::tanh(p[0] * x * d + p[1] * d + p[2] * x + p[4]);
        double r = sigmoid(x + p[5]);
        double h = std::tanh((1.0 - r) * z + r * h_prev);
        v[0] = d;
        v[1] = z;
        v[2] = r;
        v[3] = h;
        return {h, 0.0};
    }
    }
    return {};
}

CellGrads cell_backward(NodeType type, std::span<const double> p, double x, double h_prev, double c_prev,
                        const CellCache &cache, double dh, double dc, std::span<double> dp) {
    assert(p.size() == param_count(type) && dp.size() == p.size());
    const auto &v = cache.v;
    CellGrads out;
    switch (type) {
    case NodeType::Input: out.dx = dh; break;
    case NodeType::Output:
        out.dx = dh;
        dp[0] += dh;
        break;
    case NodeType::Simple: {
        double da = dh * (1.0 - v[0] * v[0]);
        out.dx = da;
        dp[0] += da;
        break;
    }
    case NodeType::UGRNN: {
        double g = v[0], c = v[1];
        double dag = dh * (h_prev - c) * g * (1.0 - g);
        double dac = dh * (1.0 - g) * (1.0 - c * c);
        out.dx = p[0] * dag + p[3] * dac;
        out.dh_prev = dh * g + p[1] * dag + p[4] * dac;
        dp[0] += dag * x;
        dp[1] += dag * h_prev;
        dp[2] += dag;
        dp[3] += dac * x;
        dp[4] += dac * h_prev;
        dp[5] += dac;
        break;
    }
    case NodeType::MGU: {
        double f = v[0], c = v[1];
        double dac = dh * f * (1.0 - c * c);
        double df = dh * (c - h_prev) + dac * p[4] * h_prev;
        double daf = df * f * (1.0 - f);
        out.dx = p[0] * daf + p[3] * dac;
        out.dh_prev = dh * (1.0 - f) + dac * p[4] * f + p[1] * daf;
        dp[0] += daf * x;
        dp[1] += daf * h_prev;
        dp[2] += daf;
        dp[3] += dac * x;
        dp[4] += dac * f * h_prev;
        dp[5] += dac;
        break;
    }
    case NodeType::GRU: {
        double z = v[0], r = v[1], c = v[2];
        double daz = dh * (c - h_prev) * z * (1.0 - z);
        double dac = dh * z * (1.0 - c * c);
        double dar = dac * p[7] * h_prev * r * (1.0 - r);
        out.dx = p[0] * daz + p[3] * dar + p[6] * dac;
        out.dh_prev = dh * (1.0 - z) + dac * p[7] * r + p[1] * daz + p[4] * dar;
        dp[0] += daz * x;
        dp[1] += daz * h_prev;
        dp[2] += daz;
        dp[3] += dar * x;
        dp[4] += dar * h_prev;
        dp[5] += dar;
        dp[6] += dac * x;
        dp[7] += dac * r * h_prev;
        dp[8] += dac;
        break;
    }
    case NodeType::LSTM: {
        double i = v[0], f = v[1], o = v[2], g = v[3], tc = v[4];
        double dct = dc + dh * o * (1.0 - tc * tc);
        double dai = dct * g * i * (1.0 - i);
        double daf = dct * c_prev * f * (1.0 - f);
        double dao = dh * tc * o * (1.0 - o);
        double dag = dct * i * (1.0 - g * g);
        out.dc_prev = dct * f;
        out.dx = p[0] * dai + p[3] * daf + p[6] * dao + p[9] * dag;
        out.dh_prev = p[1] * dai + p[4] * daf + p[7] * dao + p[10] * dag;
        const double da[4] = {dai, daf, dao, dag};
        for (int k = 0; k < 4; ++k) {
            dp[3 * k] += da[k] * x;
            dp[3 * k + 1] += da[k] * h_prev;
            dp[3 * k + 2] += da[k];
        }
        break;
    }
    case NodeType::Delta: {
        double d = v[0], z = v[1], r = v[2], h = v[3];
        double dout = dh * (1.0 - h * h);
        double daz = dout * (1.0 - r) * (1.0 - z * z);
        double dar = dout * (h_prev - z) * r * (1.0 - r);
        double dd = daz * (p[0] * x + p[1]);
        out.dx = daz * (p[0] * d + p[2]) + dar;
        out.dh_prev = dout * r + dd * p[3];
        dp[0] += daz * x * d;
        dp[1] += daz * d;
        dp[2] += daz * x;
        dp[3] += dd * h_prev;
        dp[4] += daz;
        dp[5] += dar;
        break;
    }
    }
    return out;
}

} // namespace evoforge
