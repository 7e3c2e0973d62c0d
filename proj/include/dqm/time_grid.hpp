#pragma once

#include <cmath>
#include <stdexcept>

namespace dqm {

// Uniform discretization of [0, T] into M steps, sampled at step centers.
struct TimeGrid {
    double total_time;
    int steps;

    TimeGrid(double total_time_, int steps_)
        : total_time(total_time_), steps(steps_) {
        if (!std::isfinite(total_time) || total_time <= 0.0)
            throw std::invalid_argument("TimeGrid: total time must be positive");
        if (steps < 1)
            throw std::invalid_argument("TimeGrid: need at least one step");
    }

    double dt() const { return total_time / steps; }
    double midpoint(int m) const { return (m + 0.5) * dt(); }
    double edge(int m) const { return m * dt(); }
};

} // namespace dqm
