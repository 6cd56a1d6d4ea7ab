#include "fourbar/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fourbar {

LinkageDims generate_dims(const GenConfig& cfg, Rng& rng) {
    const auto signs = type_sign_triple(cfg.type_cfg.type_id);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        TParams t;
        t.t1 = signs[0] * rng.uniform(cfg.fold_tol, cfg.m);
        t.t2 = signs[1] * rng.uniform(cfg.fold_tol, cfg.m);
        t.t3 = signs[2] * rng.uniform(cfg.fold_tol, cfg.m);
        t.t4 = rng.uniform(0.0, cfg.m);
        const LinkageDims r = dims_from_t(t);
        if (r.is_valid()) return r;
    }
    throw GenerationTimeout("generate_dims: no valid linkage after " +
                            std::to_string(cfg.max_retries) + " draws (type " +
                            std::to_string(cfg.type_cfg.type_id) + ", m=" + std::to_string(cfg.m) + ")");
}

std::vector<double> sample_inputs(const LinkageDims& r, const TypeConfig& cfg, int n, Rng& rng) {
    std::vector<double> v(static_cast<size_t>(n));
    if (input_is_crank(cfg.type_id)) {
        for (auto& x : v) x = rng.uniform(-kPi, kPi);
    } else {
        const InputRange range = input_range(r, cfg);
        const double len = range.theta_max - range.theta_min;
        for (auto& x : v) {
            const double u = rng.uniform(0.0, 2.0 * len);
            x = (u < len) ? range.theta_min + u : kTwoPi + range.theta_min + (u - len);
        }
    }
    std::sort(v.begin(), v.end());
    return v;
}

Sample generate_sample_with_n(const GenConfig& cfg, int n, Rng& rng) {
    Sample s;
    s.cfg = cfg.type_cfg;
    s.dims = generate_dims(cfg, rng);
    const auto inputs = sample_inputs(s.dims, cfg.type_cfg, n, rng);
    s.points.reserve(inputs.size());
    for (double phi : inputs) {
        const auto out = simulate_cycle(s.dims, cfg.type_cfg, phi);
        if (!out) throw std::logic_error("generate_sample: sampled input outside its own range");
        s.points.push_back({phi, *out});
    }
    return s;
}

Sample generate_sample(const GenConfig& cfg, Rng& rng) {
    const int n = (cfg.n_lo == cfg.n_hi) ? cfg.n_lo : rng.uniform_int(cfg.n_lo, cfg.n_hi);
    return generate_sample_with_n(cfg, n, rng);
}

namespace {

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

void write_sample_line(std::ostream& os, const Sample& s) {
    std::string line;
    line += std::to_string(s.cfg.type_id);
    line += ',';
    line += std::to_string(inversion_sign(s.cfg.inversion));
    for (double v : s.dims.as_array()) {
        line += ',';
        append_g17(line, v);
    }
    line += ',';
    line += std::to_string(s.points.size());
    for (const auto& p : s.points) {
        line += ',';
        append_g17(line, p.theta_in);
        line += ',';
        append_g17(line, p.theta_out);
    }
    line += '\n';
    os << line;
}

Sample parse_sample_line(const std::string& line) {
    std::istringstream in(line);
    auto field = [&in]() {
        std::string tok;
        if (!std::getline(in, tok, ',')) throw std::runtime_error("dataset line: missing field");
        return tok;
    };
    Sample s;
    s.cfg.type_id = std::stoi(field());
    s.cfg.inversion = inversion_from_sign(std::stoi(field()));
    s.dims.r1 = std::stod(field());
    s.dims.r2 = std::stod(field());
    s.dims.r3 = std::stod(field());
    s.dims.r4 = std::stod(field());
    const int n = std::stoi(field());
    s.points.resize(static_cast<size_t>(n));
    for (auto& p : s.points) {
        p.theta_in = std::stod(field());
        p.theta_out = std::stod(field());
    }
    return s;
}

void write_dataset(const std::string& path, const GenConfig& cfg, const std::vector<Sample>& samples) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& s : samples) write_sample_line(os, s);
    os.close();

    nlohmann::json meta{
        {"format_version", 1},
        {"type_id", cfg.type_cfg.type_id},
        {"inversion", inversion_sign(cfg.type_cfg.inversion)},
        {"m", cfg.m},
        {"n_lo", cfg.n_lo},
        {"n_hi", cfg.n_hi},
        {"seed", cfg.seed},
        {"fold_tol", cfg.fold_tol},
        {"count", samples.size()},
    };
    std::ofstream ms(path + ".meta.json");
    if (!ms) throw std::runtime_error("cannot open " + path + ".meta.json for writing");
    ms << meta.dump(2) << '\n';
}

std::vector<Sample> read_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<Sample> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) out.push_back(parse_sample_line(line));
    }
    return out;
}

} // namespace fourbar
