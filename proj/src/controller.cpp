#include "sdbc/controller.hpp"

#include "sdbc/errors.hpp"

#include <cmath>

namespace sdbc {

Controller::Controller(const Genome& genome, const ControllerSpec& spec)
    : spec_(spec), weights_(genome.weights), hidden_(spec.hidden)
{
    require_same_length(genome.size(), spec.genome_length(), "Controller");
}

void Controller::activate(std::span<const double> inputs, std::span<double> outputs)
{
    require_same_length(inputs.size(), spec_.inputs, "Controller::activate inputs");
    require_same_length(outputs.size(), spec_.outputs, "Controller::activate outputs");
    const double* w = weights_.data();
    for (std::size_t h = 0; h < spec_.hidden; ++h) {
        double a = 0.0;
        for (std::size_t i = 0; i < spec_.inputs; ++i)
            a += w[i] * inputs[i];
        a += w[spec_.inputs];
        w += spec_.inputs + 1;
        hidden_[h] = std::tanh(a);
    }
    for (std::size_t o = 0; o < spec_.outputs; ++o) {
        double a = 0.0;
        for (std::size_t h = 0; h < spec_.hidden; ++h)
            a += w[h] * hidden_[h];
        a += w[spec_.hidden];
        w += spec_.hidden + 1;
        outputs[o] = 1.0 / (1.0 + std::exp(-a));
    }
}

std::vector<double> Controller::activate(std::span<const double> inputs)
{
    std::vector<double> out(spec_.outputs);
    activate(inputs, out);
    return out;
}

} // namespace sdbc
