#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdbc {

/// Single-hidden-layer feed-forward topology: tanh hidden units, logistic
/// outputs, a bias unit feeding every hidden and output neuron.
struct ControllerSpec {
    std::size_t inputs = 0;
    std::size_t hidden = 8;
    std::size_t outputs = 2;

    std::size_t genome_length() const noexcept { return (inputs + 1) * hidden + (hidden + 1) * outputs; }
    friend bool operator==(const ControllerSpec&, const ControllerSpec&) = default;
};

struct Genome {
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    friend bool operator==(const Genome&, const Genome&) = default;
};

/// Weight layout: for each hidden unit its input weights then bias, followed
/// by, for each output, its hidden weights then bias. Outputs lie in (0, 1).
class Controller {
public:
    /// Throws LengthMismatchError if the genome does not fit the spec.
    Controller(const Genome& genome, const ControllerSpec& spec);

    const ControllerSpec& spec() const noexcept { return spec_; }

    void activate(std::span<const double> inputs, std::span<double> outputs);
    std::vector<double> activate(std::span<const double> inputs);

private:
    ControllerSpec spec_;
    std::vector<double> weights_;
    std::vector<double> hidden_;
};

} // namespace sdbc
