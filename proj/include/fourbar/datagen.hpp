#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fourbar/kinematics.hpp"
#include "fourbar/rng.hpp"

namespace fourbar {

// One prescribed pair. theta_in is a cycle parameter: for rocker-input
// configurations the return stroke lives in [2pi+min, 2pi+max] and is kept
// unwrapped; theta_out is always in (-pi, pi].
struct PrecisionPoint {
    double theta_in = 0;
    double theta_out = 0;
};

using PointSeq = std::vector<PrecisionPoint>;

struct Sample {
    TypeConfig cfg;
    LinkageDims dims;
    PointSeq points; // theta_in strictly ascending
};

struct GenConfig {
    TypeConfig type_cfg;
    double m = 12.0;   // upper bound on |t_j| draws
    int n_lo = 3;      // points per sample; set n_lo == n_hi for a fixed count
    int n_hi = 20;
    std::uint64_t seed = 0;
    double fold_tol = kFoldTolDefault;
    int max_retries = 10000;
};

struct GenerationTimeout : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection-sample a valid, non-folding linkage of the configured type:
// |t_j| ~ U(fold_tol, m) signed per the type's triple, t4 ~ U(0, m), mapped
// through dims_from_t and retried until both validity conditions hold.
LinkageDims generate_dims(const GenConfig& cfg, Rng& rng);

// n driver angles, ascending. Crank input: U[-pi, pi]. Rocker input: uniform
// over both legs of the cycle-parameter domain (weighted by arc length).
std::vector<double> sample_inputs(const LinkageDims& r, const TypeConfig& cfg, int n, Rng& rng);

Sample generate_sample(const GenConfig& cfg, Rng& rng);
Sample generate_sample_with_n(const GenConfig& cfg, int n, Rng& rng);

// Unbounded deterministic sample source; owns its RNG.
class SampleStream {
  public:
    explicit SampleStream(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    Sample next() { return generate_sample(cfg_, rng_); }
    Sample next_with_n(int n) { return generate_sample_with_n(cfg_, n, rng_); }
    int draw_n() { return rng_.uniform_int(cfg_.n_lo, cfg_.n_hi); }

    const GenConfig& config() const { return cfg_; }
    const Rng::state_type& rng_state() const { return rng_.state(); }
    void set_rng_state(const Rng::state_type& s) { rng_.set_state(s); }

  private:
    GenConfig cfg_;
    Rng rng_;
};

// Text dataset format, one sample per line:
//   type_id,inversion,r1,r2,r3,r4,n,phi_1,thout_1,...,phi_n,thout_n
// with 17 significant digits. A JSON sidecar (<path>.meta.json) records the
// generator configuration for reproducibility.
void write_dataset(const std::string& path, const GenConfig& cfg, const std::vector<Sample>& samples);
std::vector<Sample> read_dataset(const std::string& path);

void write_sample_line(std::ostream& os, const Sample& s);
Sample parse_sample_line(const std::string& line);

} // namespace fourbar
