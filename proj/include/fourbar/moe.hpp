#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fourbar/metrics.hpp"
#include "fourbar/neural.hpp"

namespace fourbar {

struct MissingExpert : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All 16 type configurations (types 1..8, + before -), in ranking tie-break order.
std::vector<TypeConfig> all_configs();

// Holds up to 16 loaded experts, one per TypeConfig. Registry directories
// carry a manifest.json naming the checkpoint file of each entry.
class ExpertRegistry {
  public:
    void put(ExpertModel model);
    bool has(const TypeConfig& cfg) const;
    const ExpertModel& get(const TypeConfig& cfg) const; // throws MissingExpert
    size_t size() const { return slots_.size(); }
    bool complete() const { return slots_.size() == 16; }

    static ExpertRegistry load(const std::string& dir);

    // Write inference snapshots (optimizer state zeroed) plus a manifest.
    // Training flows instead drop full checkpoints via TrainOptions and call
    // write_manifest once all entries exist.
    void save(const std::string& dir) const;

  private:
    std::map<std::pair<int, int>, ExpertModel> slots_;
};

// Canonical checkpoint filename for a configuration, e.g. "expert_t3_minus.ckpt".
std::string expert_filename(const TypeConfig& cfg);

// Write dir/manifest.json for the given configurations (canonical filenames).
void write_manifest(const std::string& dir, const std::vector<TypeConfig>& configs);

struct SynthesisResult {
    TypeConfig cfg;
    LinkageDims dims;
    bool dims_valid = true;
    double s_simul = 0; // +inf when dims_valid is false
    EvalResult eval;    // empty when dims_valid is false
    std::optional<std::pair<double, double>> initial_angles; // relative mode
};

// Strict ascending order: score, then type_id, then inversion (+ first).
bool result_order(const SynthesisResult& a, const SynthesisResult& b);

SynthesisResult synthesize_single(const ExpertRegistry& reg, const TypeConfig& cfg, const PointSeq& points);

// Runs every expert and ranks ascending by the simulation metric. With
// distinct_types only the best result per type name (1..8, inversions pooled)
// survives before truncation. top_k <= 0 keeps everything.
std::vector<SynthesisResult> synthesize_multi(const ExpertRegistry& reg, const PointSeq& points,
                                              int top_k, bool distinct_types);

// Expand relative points (first entry is the zero reference) into absolute
// variants by drawing initial angles uniform on [-pi, pi]^2. Expanded angles
// are kept unwrapped so offsets survive verbatim.
std::vector<PointSeq> expand_relative(const PointSeq& rel_points, int variants, Rng& rng);

struct RelativeSynthesis {
    std::vector<SynthesisResult> ranked; // all variants x experts, globally ranked
    int variants = 0;
    int candidates = 0;
};

RelativeSynthesis synthesize_relative(const ExpertRegistry& reg, const PointSeq& rel_points,
                                      int variants, Rng& rng);

} // namespace fourbar
