#pragma once

// Inertia-weight particle swarm optimizer (maximization) over R^d with an
// arbitrary projection onto the feasible set.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "smnuc/errors.hpp"
#include "smnuc/rng.hpp"

namespace smnuc {

struct PsoHyperparams {
    std::size_t particles = 40;
    std::size_t iterations = 150;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    double velocity_clamp = 0.5;  // per dimension
    double init_sigma = 0.05;     // Gaussian spread of the initial swarm
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double value = -std::numeric_limits<double>::infinity();
    double best_value = -std::numeric_limits<double>::infinity();
};

struct Swarm {
    std::vector<Particle> particles;
    std::vector<double> best_position;
    double best_value = -std::numeric_limits<double>::infinity();
    std::size_t iteration = 0;
    std::vector<double> best_trace;  // global best after init and after every step
};

using Position = std::vector<double>;
// Evaluates every position of a batch; one value per position, larger is better.
using BatchObjective = std::function<std::vector<double>(std::span<const Position>)>;
using Projector = std::function<Position(Position)>;

inline Position identity_projection(Position p) { return p; }

/// Adapts a per-position objective to the batch interface.
template <typename F>
BatchObjective per_position(F f) {
    return [f = std::move(f)](std::span<const Position> xs) {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(f(x));
        return out;
    };
}

namespace detail {

inline void evaluate_swarm(Swarm& swarm, const BatchObjective& objective) {
    std::vector<Position> xs;
    xs.reserve(swarm.particles.size());
    for (const auto& p : swarm.particles) xs.push_back(p.position);
    const auto values = objective(xs);
    if (values.size() != xs.size()) fail("pso", "objective returned wrong number of values");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Particle& p = swarm.particles[i];
        p.value = values[i];
        if (p.value > p.best_value) {
            p.best_value = p.value;
            p.best_position = p.position;
        }
        if (p.best_value > swarm.best_value) {
            swarm.best_value = p.best_value;
            swarm.best_position = p.best_position;
        }
    }
    swarm.best_trace.push_back(swarm.best_value);
}

}  // namespace detail

// Particle 0 sits exactly at start; the others are start plus N(0, sigma^2)
// perturbations, projected. Velocities start at zero.
inline Swarm init_swarm(const Position& start, const PsoHyperparams& hp, Stream& rng, const BatchObjective& objective,
                        const Projector& project = identity_projection) {
    if (hp.particles == 0) fail("init_swarm", "need at least one particle");
    Swarm swarm;
    swarm.particles.resize(hp.particles);
    for (std::size_t i = 0; i < hp.particles; ++i) {
        Position x = start;
        if (i > 0) {
            for (auto& v : x) v += hp.init_sigma * rng.normal();
        }
        Particle& p = swarm.particles[i];
        p.position = project(std::move(x));
        p.velocity.assign(start.size(), 0.0);
        p.best_position = p.position;
    }
    detail::evaluate_swarm(swarm, objective);
    return swarm;
}

// One synchronous step:
//   v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x),  clamped per dimension
//   x <- project(x + v)
// followed by evaluation and best updates. Rng needs uniform() on [0, 1).
template <typename Rng>
void pso_step(Swarm& swarm, const BatchObjective& objective, const PsoHyperparams& hp, Rng& rng,
              const Projector& project = identity_projection) {
    for (auto& p : swarm.particles) {
        for (std::size_t d = 0; d < p.position.size(); ++d) {
            const double r1 = rng.uniform();
            const double r2 = rng.uniform();
            double v = hp.inertia * p.velocity[d] + hp.cognitive * r1 * (p.best_position[d] - p.position[d]) +
                       hp.social * r2 * (swarm.best_position[d] - p.position[d]);
            v = std::clamp(v, -hp.velocity_clamp, hp.velocity_clamp);
            p.velocity[d] = v;
            p.position[d] += v;
        }
        p.position = project(std::move(p.position));
    }
    detail::evaluate_swarm(swarm, objective);
    ++swarm.iteration;
}

}  // namespace smnuc
