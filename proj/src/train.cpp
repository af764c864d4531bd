// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "evoforge/error.hpp"
#include "evoforge/rnn.hpp"

namespace evoforge {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum", "must lie in [0, 1)");
    if (epochs < 0) throw ConfigError("epochs", "must be non-negative");
    if (!(grad_boost_low >= 0.0 && grad_boost_low < grad_clip_high))
        throw ConfigError("grad_boost_low", "must be non-negative and below grad_clip_high");
    if (window == 0) throw ConfigError("window", "must be positive");
}

std::vector<double> rescale_gradient(std::vector<double> grad, const TrainConfig &cfg) {
    double ss = 0.0;
    for (double v : grad) ss += v * v;
    double norm = std::sqrt(ss);
    double factor = 1.0;
    if (norm > cfg.grad_clip_high) factor = cfg.grad_clip_high / norm;
    else if (norm > 0.0 && norm < cfg.grad_boost_low) factor = cfg.grad_boost_low / norm;
    if (factor != 1.0)
        for (double &v : grad) v *= factor;
    return grad;
}

Genome train(Genome g, const TrainingData &data, const TrainConfig &cfg) {
    cfg.validate();
    g.clear_evaluation();
    Phenotype p(g);
    std::vector<double> theta(p.parameters().begin(), p.parameters().end());
    std::vector<double> velocity(theta.size(), 0.0);
    const double mu = cfg.momentum;

    auto mark_diverged = [&] {
        g.diverged = true;
        g.fitness = std::numeric_limits<double>::infinity();
        g.mae = std::numeric_limits<double>::infinity();
        return g;
    };

    try {
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            LossGradient lg = p.loss_and_gradient(data.train, cfg.window);
            std::vector<double> grad = rescale_gradient(std::move(lg.gradient), cfg);
            for (std::size_t k = 0; k < theta.size(); ++k) {
                double prev = velocity[k];
                velocity[k] = mu * velocity[k] - cfg.learning_rate * grad[k];
                theta[k] += -mu * prev + (1.0 + mu) * velocity[k];
                if (!std::isfinite(theta[k])) {
                    p.write_back(g);
                    return mark_diverged();
                }
            }
            p.set_parameters(theta);
        }
        p.write_back(g);
        ErrorMetrics m = error_metrics(p.forward(data.validation.inputs), data.validation.targets);
        if (!std::isfinite(m.mse)) return mark_diverged();
        g.fitness = m.mse;
        g.mae = m.mae;
    } catch (const NumericalDivergence &) {
        p.write_back(g);
        return mark_diverged();
    }
    return g;
}

} // namespace evoforge
