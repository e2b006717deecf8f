#include "sdbc/analysis.hpp"

#include "sdbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sdbc {

std::span<const double> SomGrid::prototype(std::size_t cell) const
{
    if (cell >= cells())
        throw std::out_of_range("SomGrid: cell index out of range");
    return std::span(prototypes).subspan(cell * dim, dim);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double decayed(double start, double end, double t)
{
    return start * std::pow(end / start, t);
}

} // namespace

std::size_t best_matching_unit(const SomGrid& map, std::span<const double> sample)
{
    require_same_length(sample.size(), map.dim, "best_matching_unit");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < map.cells(); ++c) {
        const double d = squared_distance(sample, map.prototype(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double quantisation_error(const SomGrid& map, std::span<const std::vector<double>> samples)
{
    if (samples.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& s : samples)
        sum += std::sqrt(squared_distance(s, map.prototype(best_matching_unit(map, s))));
    return sum / static_cast<double>(samples.size());
}

SomGrid train_som(std::span<const std::vector<double>> samples, const SomParams& params, std::mt19937_64& rng,
                  std::vector<double>* epoch_errors)
{
    if (samples.empty())
        throw std::invalid_argument("train_som: no samples");
    if (params.width == 0 || params.height == 0 || params.epochs == 0)
        throw std::invalid_argument("train_som: grid dimensions and epochs must be positive");
    if (params.learning_rate <= 0.0 || params.final_learning_rate <= 0.0 || params.final_radius <= 0.0)
        throw std::invalid_argument("train_som: rates and radii must be positive");
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples) {
        require_same_length(s.size(), dim, "train_som");
        for (double v : s)
            if (!std::isfinite(v))
                throw std::invalid_argument("train_som: non-finite sample");
    }

    SomGrid map;
    map.width = params.width;
    map.height = params.height;
    map.dim = dim;
    map.params = params;
    if (map.params.radius <= 0.0)
        map.params.radius = std::max(1.0, static_cast<double>(std::max(params.width, params.height)) / 2.0);
    map.prototypes.resize(map.cells() * dim);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    for (std::size_t c = 0; c < map.cells(); ++c) {
        const auto& s = samples[pick(rng)];
        std::copy(s.begin(), s.end(), map.prototypes.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double total = static_cast<double>(params.epochs * samples.size());
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const double t = static_cast<double>(step++) / total;
            const double lr = decayed(map.params.learning_rate, params.final_learning_rate, t);
            const double radius = decayed(map.params.radius, params.final_radius, t);
            const double denom = 2.0 * radius * radius;
            const auto& s = samples[idx];
            const std::size_t bmu = best_matching_unit(map, s);
            const double bx = static_cast<double>(bmu % map.width);
            const double by = static_cast<double>(bmu / map.width);
            for (std::size_t c = 0; c < map.cells(); ++c) {
                const double dx = static_cast<double>(c % map.width) - bx;
                const double dy = static_cast<double>(c / map.width) - by;
                const double h = std::exp(-(dx * dx + dy * dy) / denom);
                const double rate = lr * h;
                if (rate < 1e-12)
                    continue;
                double* p = map.prototypes.data() + c * dim;
                for (std::size_t k = 0; k < dim; ++k)
                    p[k] += rate * (s[k] - p[k]);
            }
        }
        if (epoch_errors)
            epoch_errors->push_back(quantisation_error(map, samples));
    }
    return map;
}

DensityMap exploration_density(const SomGrid& map, std::span<const MethodSamples> methods)
{
    DensityMap out;
    out.width = map.width;
    out.height = map.height;
    const std::size_t cells = map.cells();
    std::vector<double> fit_sum_all(cells, 0.0);
    std::vector<std::size_t> fit_n_all(cells, 0);
    for (const auto& m : methods) {
        if (!m.fitness.empty())
            require_same_length(m.fitness.size(), m.samples.size(), "exploration_density");
        out.methods.push_back(m.method);
        std::vector<std::size_t> counts(cells, 0);
        std::vector<double> fit_sum(cells, 0.0);
        for (std::size_t i = 0; i < m.samples.size(); ++i) {
            const std::size_t c = best_matching_unit(map, m.samples[i]);
            ++counts[c];
            if (!m.fitness.empty()) {
                fit_sum[c] += m.fitness[i];
                fit_sum_all[c] += m.fitness[i];
                ++fit_n_all[c];
            }
        }
        std::vector<double> mean(cells, std::numeric_limits<double>::quiet_NaN());
        if (!m.fitness.empty())
            for (std::size_t c = 0; c < cells; ++c)
                if (counts[c] > 0)
                    mean[c] = fit_sum[c] / static_cast<double>(counts[c]);
        out.counts.push_back(std::move(counts));
        out.mean_fitness.push_back(std::move(mean));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells; ++c) {
        if (fit_n_all[c] == 0)
            continue;
        const double mean = fit_sum_all[c] / static_cast<double>(fit_n_all[c]);
        if (mean > best) {
            best = mean;
            out.best_cell = c;
            out.has_best_cell = true;
        }
    }
    return out;
}

std::size_t occupied_cells(std::span<const std::size_t> counts)
{
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

std::size_t cells_holding(std::span<const std::size_t> counts, double fraction)
{
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0)
        return 0;
    std::vector<std::size_t> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double need = fraction * static_cast<double>(total);
    std::size_t held = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        held += sorted[i];
        if (static_cast<double>(held) >= need)
            return i + 1;
    }
    return sorted.size();
}

void write_density_svg(std::ostream& out, const DensityMap& map, std::size_t method, double cell_size)
{
    if (method >= map.counts.size())
        throw std::out_of_range("write_density_svg: method index out of range");
    const auto& counts = map.counts[method];
    const std::size_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    const double w = cell_size * static_cast<double>(map.width);
    const double h = cell_size * static_cast<double>(map.height);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + cell_size
        << "\" viewBox=\"0 0 " << w << ' ' << h + cell_size << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\" stroke=\"black\"/>\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double cx = (static_cast<double>(c % map.width) + 0.5) * cell_size;
        const double cy = (static_cast<double>(c / map.width) + 0.5) * cell_size;
        out << "<rect x=\"" << cx - cell_size / 2 << "\" y=\"" << cy - cell_size / 2 << "\" width=\"" << cell_size
            << "\" height=\"" << cell_size << "\" fill=\"none\" stroke=\"#ddd\"/>\n";
        if (counts[c] > 0 && peak > 0) {
            const double r = 0.45 * cell_size * std::sqrt(static_cast<double>(counts[c]) / static_cast<double>(peak));
            out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r << "\" fill=\"#3465a4\"><title>"
                << counts[c] << "</title></circle>\n";
        }
        if (map.has_best_cell && c == map.best_cell)
            out << "<rect x=\"" << cx - cell_size / 2 + 1 << "\" y=\"" << cy - cell_size / 2 + 1 << "\" width=\""
                << cell_size - 2 << "\" height=\"" << cell_size - 2 << "\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"2\"/>\n";
    }
    out << "<text x=\"4\" y=\"" << h + cell_size * 0.7 << "\" font-family=\"sans-serif\" font-size=\"14\">"
        << map.methods[method] << "</text>\n</svg>\n";
}

std::vector<MiRow> mi_relevance_table(std::span<const MiLog> runs)
{
    const std::vector<std::string>* names = nullptr;
    for (const auto& r : runs) {
        if (r.mi.empty())
            continue;
        if (names && *names != r.names)
            throw std::invalid_argument("mi_relevance_table: runs disagree on feature names");
        names = &r.names;
    }
    if (!names)
        throw std::invalid_argument("mi_relevance_table: no MI values in the given runs");
    const std::size_t k = names->size();
    std::vector<double> sum(k, 0.0), sq(k, 0.0);
    std::size_t n = 0;
    for (const auto& r : runs)
        for (const auto& gen : r.mi) {
            require_same_length(gen.size(), k, "mi_relevance_table");
            for (std::size_t j = 0; j < k; ++j) {
                sum[j] += gen[j];
                sq[j] += gen[j] * gen[j];
            }
            ++n;
        }
    std::vector<MiRow> rows(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double mean = sum[j] / static_cast<double>(n);
        rows[j] = {(*names)[j], mean, std::sqrt(std::max(0.0, sq[j] / static_cast<double>(n) - mean * mean)), n};
    }
    std::stable_sort(rows.begin(), rows.end(), [](const MiRow& a, const MiRow& b) { return a.mean > b.mean; });
    return rows;
}

namespace {

// Midranks (1-based) of the pooled sample.
std::vector<double> midranks(std::span<const double> pooled)
{
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]])
            ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

double tie_term(std::span<const double> pooled)
{
    std::vector<double> sorted(pooled.begin(), pooled.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        const double t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// All values of U over every assignment of n1 of the pooled ranks to the first sample.
void enumerate_u(std::span<const double> ranks, std::size_t start, std::size_t remaining, double rank_sum,
                 double offset, std::vector<double>& out)
{
    if (remaining == 0) {
        out.push_back(rank_sum - offset);
        return;
    }
    for (std::size_t i = start; i + remaining <= ranks.size(); ++i)
        enumerate_u(ranks, i + 1, remaining - 1, rank_sum + ranks[i], offset, out);
}

} // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative,
                                 std::size_t exact_limit)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");
    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    const double offset = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
    const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

    MannWhitneyResult res;
    res.u = r1 - offset;
    const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    constexpr double eps = 1e-9;

    if (std::max(n1, n2) <= exact_limit) {
        res.exact = true;
        std::vector<double> all;
        enumerate_u(ranks, 0, n1, 0.0, offset, all);
        std::size_t hits = 0;
        for (double u : all) {
            switch (alternative) {
            case Alternative::two_sided: hits += std::abs(u - mu) >= std::abs(res.u - mu) - eps; break;
            case Alternative::greater: hits += u >= res.u - eps; break;
            case Alternative::less: hits += u <= res.u + eps; break;
            }
        }
        res.p = static_cast<double>(hits) / static_cast<double>(all.size());
        return res;
    }

    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((nn + 1.0) - tie_term(pooled) / (nn * (nn - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0;
        return res;
    }
    const double sd = std::sqrt(var);
    switch (alternative) {
    case Alternative::two_sided:
        res.p = 2.0 * upper_tail((std::abs(res.u - mu) - 0.5) / sd);
        break;
    case Alternative::greater:
        res.p = upper_tail((res.u - mu - 0.5) / sd);
        break;
    case Alternative::less:
        res.p = upper_tail((mu - res.u - 0.5) / sd);
        break;
    }
    res.p = std::clamp(res.p, 0.0, 1.0);
    return res;
}

} // namespace sdbc
