#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fourbar/datagen.hpp"
#include "fourbar/kinematics.hpp"
#include "fourbar/rng.hpp"
#include "fourbar/tensor.hpp"

namespace fourbar {

struct ExpertHyperParams {
    int layers = 7;
    int hidden = 128;
    double dropout_p = 0.3;
    double lr = 1e-4;
    double weight_decay = 2e-3;
    std::vector<int> schedule_milestones{200};
    double gamma = 0.8;
    int epochs = 2000;
    int samples_per_epoch = 1024;
    int batch_size = 32;
    int n_min = 3;  // points per training sequence, drawn per minibatch
    int n_max = 20;
    int probe_size = 16; // held-out sequences scored each epoch
    std::uint64_t seed = 0;
};

// Gate rows stacked [input; forget; cell; output], H rows each.
struct LstmLayer {
    Matrix w; // 4H x in
    Matrix u; // 4H x H
    std::vector<double> b; // 4H
};

struct Weights {
    std::vector<LstmLayer> lstm;
    Matrix head_w; // 4 x H
    std::vector<double> head_b; // 4

    void match_shape(const Weights& other); // allocate zeroed like `other`
    void zero();
};

// Visit every parameter tensor with a stable name, in a fixed order.
void for_each_param(Weights& w, const std::function<void(const std::string&, std::vector<double>&)>& fn);

struct ExpertModel {
    ExpertHyperParams hyper;
    TypeConfig cfg;
    Weights w;
};

// Uniform +-1/sqrt(hidden) init, forget-gate bias +1; consumes rng.
ExpertModel init_model(const TypeConfig& cfg, const ExpertHyperParams& hyper, Rng& rng);

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inference-mode forward pass (no dropout): raw 4-vector head output.
std::array<double, 4> forward_raw(const ExpertModel& m, const PointSeq& points);

// T_j = softplus(h_j) * sgn_j for the config's sign triple, t4 = softplus(h4),
// mapped through dims_from_t. The sign pattern matches cfg for every h.
LinkageDims type_layer(const std::array<double, 4>& h, const TypeConfig& cfg);
TParams type_layer_t(const std::array<double, 4>& h, const TypeConfig& cfg);

// (1/4) sum (a_i - b_i)^2
double mse_loss(const LinkageDims& a, const LinkageDims& b);

// Inference: type_layer(forward_raw(...)). The result always carries cfg's
// sign pattern; it may still violate the validity conditions (check
// LinkageDims::is_valid before simulating).
LinkageDims predict(const ExpertModel& m, const PointSeq& points);

// Scratch buffers reused across minibatches.
struct Workspace;
Workspace* make_workspace();
void free_workspace(Workspace*);

struct WorkspaceHandle {
    WorkspaceHandle() : p(make_workspace()) {}
    ~WorkspaceHandle() { free_workspace(p); }
    WorkspaceHandle(const WorkspaceHandle&) = delete;
    WorkspaceHandle& operator=(const WorkspaceHandle&) = delete;
    Workspace* p;
};

// Mean loss over the minibatch (all samples must share one sequence length).
// If grads != nullptr, accumulates batch-averaged gradients of
// mse(type_layer(forward(...))) into it. If dropout_rng != nullptr the pass
// runs in training mode (inverted dropout between stacked layers).
double batch_loss(const ExpertModel& m, std::span<const Sample> batch, Weights* grads,
                  Rng* dropout_rng, Workspace& ws);

struct AdamState {
    Weights m, v;
    std::int64_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    static AdamState for_model(const ExpertModel& model);
};

// Standard Adam with bias correction; weight decay is coupled (added to the
// gradient as decay * w before the moment updates).
void adam_step(Weights& w, const Weights& grads, AdamState& st, double lr, double weight_decay);

// lr * gamma^(milestones passed at 0-based epoch index e).
double lr_at_epoch(const ExpertHyperParams& hyper, int epoch);

struct TrainReport {
    std::vector<double> mean_loss;     // per epoch
    std::vector<double> probe_s_simul; // mean simulation metric on the probe set
    std::vector<double> lr;            // per epoch
};

struct TrainState {
    ExpertModel model;
    AdamState adam;
    Rng dropout_rng;
    Rng::state_type stream_rng{}; // training-stream RNG, captured for checkpointing
    int epoch = 0;
    TrainReport report;
};

TrainState init_training(const TypeConfig& cfg, const ExpertHyperParams& hyper);

struct TrainOptions {
    std::string checkpoint_path; // written every checkpoint_interval epochs (and at the end)
    int checkpoint_interval = 0; // 0 = only final (when checkpoint_path set)
    bool verbose = false;
};

// Runs epochs [state.epoch, until_epoch). The stream must generate samples of
// the model's type; its RNG is restored from state.stream_rng when resuming.
// Throws on non-finite loss.
void train_until(TrainState& state, SampleStream& stream, int until_epoch, const TrainOptions& opts = {});

// Deterministic probe set used for the per-epoch simulation-metric trace.
std::vector<Sample> make_probe_set(const TypeConfig& cfg, const ExpertHyperParams& hyper, int count);

} // namespace fourbar
