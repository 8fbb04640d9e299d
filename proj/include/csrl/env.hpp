#pragma once

// Datasets and the compression environment: state = normalized datum,
// action = compression ratio, reward = compression score after a full
// compress -> recover round trip.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agents.hpp"
#include "cs.hpp"
#include "numerics.hpp"

namespace csrl::env {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::string name;
    std::size_t dim = 0;
    std::vector<Vec> samples;

    std::size_t size() const { return samples.size(); }
};

inline std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline constexpr std::uint32_t kIdxImageMagic = 2051;

/// IDX3 unsigned-byte images (magic 2051), flattened row-major, scaled by 1/255.
/// max_count = 0 loads every image.
inline Dataset load_idx(const std::string& path, std::size_t max_count = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("dataset file not found: " + path);
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16) throw DatasetError("truncated IDX file (header): " + path);
    if (read_be32(bytes.data()) != kIdxImageMagic)
        throw DatasetError("bad IDX magic in " + path + " (expected 2051)");
    const std::size_t count = read_be32(bytes.data() + 4);
    const std::size_t rows = read_be32(bytes.data() + 8);
    const std::size_t cols = read_be32(bytes.data() + 12);
    const std::size_t dim = rows * cols;
    if (bytes.size() < 16 + count * dim) throw DatasetError("truncated IDX file (pixel data): " + path);

    Dataset d;
    d.name = path;
    d.dim = dim;
    const std::size_t take = max_count ? std::min(max_count, count) : count;
    d.samples.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        Vec v(static_cast<Eigen::Index>(dim));
        const unsigned char* px = bytes.data() + 16 + i * dim;
        for (std::size_t j = 0; j < dim; ++j) v(static_cast<Eigen::Index>(j)) = px[j] / 255.0;
        d.samples.push_back(std::move(v));
    }
    return d;
}

/// Writes an IDX3 image file; pixel values are rounded from [0,1] to bytes.
inline void write_idx(const std::string& path, const Dataset& d, std::size_t rows, std::size_t cols) {
    if (rows * cols != d.dim) throw std::invalid_argument("write_idx: rows*cols must equal dim");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot open for writing: " + path);
    auto be32 = [&out](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    be32(kIdxImageMagic);
    be32(static_cast<std::uint32_t>(d.size()));
    be32(static_cast<std::uint32_t>(rows));
    be32(static_cast<std::uint32_t>(cols));
    for (const auto& s : d.samples)
        for (Eigen::Index j = 0; j < s.size(); ++j)
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(s(j), 0.0, 1.0) * 255.0))));
}

/// Rectangular numeric CSV, one sample per row. Data already inside [0,1] is kept
/// verbatim; otherwise every column is min-max scaled to [0,1] and constant
/// columns map to 0.
inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("dataset file not found: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto end = line.find(',', start);
            std::string field = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            field = b == std::string::npos ? "" : field.substr(b, e - b + 1);
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v))
                throw DatasetError("non-numeric value '" + field + "' at line " + std::to_string(lineno));
            row.push_back(v);
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DatasetError("ragged CSV row at line " + std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DatasetError("empty CSV: " + path);

    const std::size_t dim = rows.front().size();
    bool in_unit = true;
    for (const auto& r : rows)
        for (double v : r) in_unit = in_unit && v >= 0.0 && v <= 1.0;
    if (!in_unit) {
        for (std::size_t j = 0; j < dim; ++j) {
            double lo = rows[0][j], hi = rows[0][j];
            for (const auto& r : rows) {
                lo = std::min(lo, r[j]);
                hi = std::max(hi, r[j]);
            }
            for (auto& r : rows) r[j] = hi > lo ? (r[j] - lo) / (hi - lo) : 0.0;
        }
    }
    Dataset d;
    d.name = path;
    d.dim = dim;
    for (const auto& r : rows) d.samples.push_back(Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(dim)));
    return d;
}

inline void write_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot open for writing: " + path);
    out << std::setprecision(17);
    for (const auto& s : d.samples) {
        for (Eigen::Index j = 0; j < s.size(); ++j) out << (j ? "," : "") << s(j);
        out << '\n';
    }
}

/// Average-pools square images over factor x factor blocks.
inline Dataset downscale(const Dataset& d, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("downscale: factor must be >= 1");
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d.dim))));
    if (side * side != d.dim) throw std::invalid_argument("downscale: dim is not a square number");
    if (side % factor != 0) throw std::invalid_argument("downscale: side not divisible by factor");
    if (factor == 1) return d;
    const std::size_t out_side = side / factor;
    const double norm = 1.0 / static_cast<double>(factor * factor);
    Dataset out;
    out.name = d.name + "/ds" + std::to_string(factor);
    out.dim = out_side * out_side;
    for (const auto& s : d.samples) {
        Vec v = Vec::Zero(static_cast<Eigen::Index>(out.dim));
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t c = 0; c < side; ++c)
                v(static_cast<Eigen::Index>((r / factor) * out_side + c / factor)) +=
                    s(static_cast<Eigen::Index>(r * side + c));
        out.samples.push_back(v * norm);
    }
    return out;
}

/// Exactly k nonzeros per sample at uniform positions, values ~ U[0.5, 1].
inline Dataset synth_sparse(std::size_t n, std::size_t k, std::size_t count, std::uint64_t seed) {
    if (k < 1 || k > n) throw std::invalid_argument("synth_sparse: need 1 <= k <= n");
    Rng rng(derive_seed(seed, 0x5350ULL));
    Dataset d;
    d.name = "synthetic(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
    d.dim = n;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < count; ++i) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // partial Fisher-Yates
        for (std::size_t j = 0; j < k; ++j) std::swap(idx[j], idx[j + rng.index(n - j)]);
        Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < k; ++j) v(static_cast<Eigen::Index>(idx[j])) = rng.uniform(0.5, 1.0);
        d.samples.push_back(std::move(v));
    }
    return d;
}

/// Handwriting-like images: two or three pen strokes (quadratic Bezier curves) on a
/// dark side x side canvas, values in [0,1]. A stand-in for MNIST when the real
/// files are unavailable.
inline Dataset synth_strokes(std::size_t side, std::size_t count, std::uint64_t seed, double pen_radius = 1.5) {
    if (side < 4) throw std::invalid_argument("synth_strokes: side must be >= 4");
    Rng rng(derive_seed(seed, 0x5754ULL));
    Dataset d;
    d.name = "strokes(" + std::to_string(side) + "x" + std::to_string(side) + ")";
    d.dim = side * side;
    const double lo = 0.18 * static_cast<double>(side), hi = 0.82 * static_cast<double>(side);
    for (std::size_t i = 0; i < count; ++i) {
        Vec img = Vec::Zero(static_cast<Eigen::Index>(d.dim));
        const int strokes = 2 + static_cast<int>(rng.index(2));
        for (int s = 0; s < strokes; ++s) {
            double px[3], py[3];
            for (int q = 0; q < 3; ++q) {
                px[q] = rng.uniform(lo, hi);
                py[q] = rng.uniform(lo, hi);
            }
            const int samples = static_cast<int>(4 * side);
            for (int t = 0; t <= samples; ++t) {
                const double u = static_cast<double>(t) / samples;
                const double w0 = (1 - u) * (1 - u), w1 = 2 * u * (1 - u), w2 = u * u;
                const double cx = w0 * px[0] + w1 * px[1] + w2 * px[2];
                const double cy = w0 * py[0] + w1 * py[1] + w2 * py[2];
                for (std::size_t r = 0; r < side; ++r) {
                    for (std::size_t c = 0; c < side; ++c) {
                        const double dist = std::hypot(static_cast<double>(c) + 0.5 - cx, static_cast<double>(r) + 0.5 - cy);
                        const double v = std::clamp(pen_radius + 0.5 - dist, 0.0, 1.0);
                        auto& cell = img(static_cast<Eigen::Index>(r * side + c));
                        cell = std::max(cell, v);
                    }
                }
            }
        }
        d.samples.push_back(std::move(img));
    }
    return d;
}

struct StepResult {
    double reward = 0.0;
    double rmse = 0.0;
    std::size_t m = 0;
    bool converged = true;
    bool failed = false; // recovery raised; reconstruction taken as zero
};

struct CompressionEnv {
    cs::CodecConfig codec;
    cs::ScoreParams score;
    Dataset dataset;
    Rng sampler{0};

    CompressionEnv(cs::CodecConfig c, cs::ScoreParams s, Dataset d, std::uint64_t sampler_seed = 0)
        : codec(c), score(s), dataset(std::move(d)), sampler(sampler_seed) {
        if (codec.n != dataset.dim) throw std::invalid_argument("env: codec n must equal dataset dim");
        codec.validate();
    }

    std::size_t draw_index() { return sampler.index(dataset.size()); }
};

inline StepResult env_step_detailed(const CompressionEnv& env, const Vec& x, double c) {
    StepResult out;
    const auto cv = cs::compress(x, c, env.codec);
    out.m = cv.m;
    Vec x_hat;
    try {
        const auto rec = cs::recover_detailed(cv, env.codec);
        x_hat = rec.x;
        out.converged = rec.converged;
    } catch (const cs::RecoveryError&) {
        x_hat = Vec::Zero(x.size());
        out.failed = true;
        out.converged = false;
    }
    out.rmse = cs::rmse(x, x_hat);
    out.reward = cs::compression_score(c, out.rmse, env.score);
    return out;
}

/// E(c) for datum x: compress, recover, score.
inline double env_step(const CompressionEnv& env, const Vec& x, double c) { return env_step_detailed(env, x, c).reward; }

inline double greedy_ratio(const agents::OsqnetAgent& a, const Vec& s) {
    return a.config().action_set[a.greedy_index(s)];
}

inline double greedy_ratio(const agents::AcOselmAgent& a, const Vec& s) {
    const Vec mu = a.actor_forward(s);
    return std::clamp(mu(0), a.config().action_min, a.config().action_max);
}

// Scalar-ratio adapters so the training loop is agent-agnostic.
inline double act(agents::OsqnetAgent& a, const Vec& s, bool explore) { return a.select(s, explore); }
inline double act(agents::AcOselmAgent& a, const Vec& s, bool explore) { return a.select(s, explore)(0); }

inline void learn(agents::OsqnetAgent& a, const Vec& s, double c, double r, const Vec& s_next) {
    a.observe(s, c, r, s_next);
}
inline void learn(agents::AcOselmAgent& a, const Vec& s, double c, double r, const Vec& s_next) {
    a.observe(s, Vec::Constant(1, c), r, s_next);
}

struct Evaluation {
    double mean_reward = 0.0;
    double action_mean = 0.0;
    double action_min = 0.0;
    double action_max = 0.0;
    std::size_t failures = 0;
};

/// Greedy action on every sample; arithmetic mean of the rewards.
template <typename Agent>
Evaluation evaluate_policy_detailed(const Agent& agent, const CompressionEnv& env) {
    Evaluation ev;
    if (env.dataset.size() == 0) return ev;
    ev.action_min = 1e300;
    ev.action_max = -1e300;
    double total = 0.0, act = 0.0;
    for (const auto& x : env.dataset.samples) {
        const double c = greedy_ratio(agent, x);
        const auto r = env_step_detailed(env, x, c);
        total += r.reward;
        act += c;
        ev.action_min = std::min(ev.action_min, c);
        ev.action_max = std::max(ev.action_max, c);
        ev.failures += r.failed ? 1 : 0;
    }
    const auto n = static_cast<double>(env.dataset.size());
    ev.mean_reward = total / n;
    ev.action_mean = act / n;
    return ev;
}

template <typename Agent>
double evaluate_policy(const Agent& agent, const CompressionEnv& env) {
    return evaluate_policy_detailed(agent, env).mean_reward;
}

} // namespace csrl::env
