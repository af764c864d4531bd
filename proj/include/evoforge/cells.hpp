// SPDX-License-Identifier: Apache-2.0
//
// Scalar node cells. Every node sees one aggregated input x (the weighted sum
// of its feed-forward and recurrent in-edges) and its own previous output
// h_prev (plus c_prev for LSTM). sigma is the logistic function.
//
//   output  h = x + b                                   params [b]
//   simple  h = tanh(x + b)                             params [b]
//   ugrnn   g = sigma(wg x + ug h_prev + bg)            params [wg ug bg wc uc bc]
//           c = tanh(wc x + uc h_prev + bc)
//           h = g h_prev + (1 - g) c
//   mgu     f = sigma(wf x + uf h_prev + bf)            params [wf uf bf wc uc bc]
//           c = tanh(wc x + uc (f h_prev) + bc)
//           h = (1 - f) h_prev + f c
//   gru     z = sigma(wz x + uz h_prev + bz)            params [wz uz bz wr ur br wc uc bc]
//           r = sigma(wr x + ur h_prev + br)
//           c = tanh(wc x + uc (r h_prev) + bc)
//           h = (1 - z) h_prev + z c
//   lstm    i, f, o = sigma(w* x + u* h_prev + b*)      params [wi ui bi wf uf bf wo uo bo wg ug bg]
//           g = tanh(wg x + ug h_prev + bg)
//           c = f c_prev + i g,  h = o tanh(c)
//   delta   d = v h_prev                                params [alpha beta1 beta2 v bz br]
//           z = tanh(alpha x d + beta1 d + beta2 x + bz)
//           r = sigma(x + br)
//           h = tanh((1 - r) z + r h_prev)
#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "evoforge/genome.hpp"

namespace evoforge {

inline constexpr std::size_t kLstmForgetBiasSlot = 5;

/// Intermediate values a cell saves for its backward pass.
struct CellCache {
    std::array<double, 8> v{};
};

struct CellOutput {
    double h = 0.0;
    double c = 0.0;
};

struct CellGrads {
    double dx = 0.0;
    double dh_prev = 0.0;
    double dc_prev = 0.0;
};

/// Evaluates a non-input cell. `params` has param_count(type) entries.
CellOutput cell_forward(NodeType type, std::span<const double> params, double x, double h_prev, double c_prev,
                        CellCache &cache);

/// Reverse-mode step through one cell evaluation. `dh` and `dc` are the
/// upstream derivatives of the loss with respect to the cell's h and c;
/// parameter derivatives are accumulated into `dparams`.
CellGrads cell_backward(NodeType type, std::span<const double> params, double x, double h_prev, double c_prev,
                        const CellCache &cache, double dh, double dc, std::span<double> dparams);

} // namespace evoforge
