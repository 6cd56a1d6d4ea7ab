#include "fourbar/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fourbar/checkpoint.hpp"
#include "fourbar/metrics.hpp"

namespace fourbar {

namespace {

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

} // namespace

void Weights::match_shape(const Weights& other) {
    lstm.resize(other.lstm.size());
    for (size_t l = 0; l < lstm.size(); ++l) {
        lstm[l].w.resize(other.lstm[l].w.rows, other.lstm[l].w.cols);
        lstm[l].u.resize(other.lstm[l].u.rows, other.lstm[l].u.cols);
        lstm[l].b.assign(other.lstm[l].b.size(), 0.0);
    }
    head_w.resize(other.head_w.rows, other.head_w.cols);
    head_b.assign(other.head_b.size(), 0.0);
}

void Weights::zero() {
    for (auto& l : lstm) {
        l.w.zero();
        l.u.zero();
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    head_w.zero();
    std::fill(head_b.begin(), head_b.end(), 0.0);
}

void for_each_param(Weights& w, const std::function<void(const std::string&, std::vector<double>&)>& fn) {
    for (size_t l = 0; l < w.lstm.size(); ++l) {
        const std::string base = "lstm" + std::to_string(l);
        fn(base + ".w", w.lstm[l].w.a);
        fn(base + ".u", w.lstm[l].u.a);
        fn(base + ".b", w.lstm[l].b);
    }
    fn("head.w", w.head_w.a);
    fn("head.b", w.head_b);
}

ExpertModel init_model(const TypeConfig& cfg, const ExpertHyperParams& hyper, Rng& rng) {
    ExpertModel m;
    m.hyper = hyper;
    m.cfg = cfg;
    const int H = hyper.hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(H));
    auto fill = [&](std::vector<double>& v) {
        for (auto& x : v) x = rng.uniform(-bound, bound);
    };
    m.w.lstm.resize(static_cast<size_t>(hyper.layers));
    for (int l = 0; l < hyper.layers; ++l) {
        auto& layer = m.w.lstm[static_cast<size_t>(l)];
        layer.w.resize(4 * H, l == 0 ? 2 : H);
        layer.u.resize(4 * H, H);
        layer.b.assign(static_cast<size_t>(4 * H), 0.0);
        fill(layer.w.a);
        fill(layer.u.a);
        for (int i = H; i < 2 * H; ++i) layer.b[static_cast<size_t>(i)] = 1.0; // forget gate
    }
    m.w.head_w.resize(4, H);
    fill(m.w.head_w.a);
    m.w.head_b.assign(4, 0.0);
    return m;
}

TParams type_layer_t(const std::array<double, 4>& h, const TypeConfig& cfg) {
    const auto signs = type_sign_triple(cfg.type_id);
    TParams t;
    t.t1 = signs[0] * softplus(h[0]);
    t.t2 = signs[1] * softplus(h[1]);
    t.t3 = signs[2] * softplus(h[2]);
    t.t4 = softplus(h[3]);
    return t;
}

LinkageDims type_layer(const std::array<double, 4>& h, const TypeConfig& cfg) {
    return dims_from_t(type_layer_t(h, cfg));
}

double mse_loss(const LinkageDims& a, const LinkageDims& b) {
    const auto va = a.as_array();
    const auto vb = b.as_array();
    double s = 0;
    for (int i = 0; i < 4; ++i) s += (va[i] - vb[i]) * (va[i] - vb[i]);
    return 0.25 * s;
}

struct Workspace {
    // Per (step, layer) activation caches; index t * layers + l.
    std::vector<Matrix> gi, gf, gg, go, c, h, mask, xdrop;
    std::vector<Matrix> x0;                  // per step, 2 x B
    Matrix y;                                // 4 x B head output
    Matrix z, dz, dh_cur, dc, tanh_c, dx;    // step scratch
    std::vector<Matrix> dh_next, dc_next, dh_above; // per layer
    Matrix zero_hb;
};

Workspace* make_workspace() { return new Workspace; }
void free_workspace(Workspace* p) { delete p; }

namespace {

void ensure(Matrix& m, int r, int c) {
    if (m.rows != r || m.cols != c) m.resize(r, c);
}

// Forward pass over a same-length minibatch; fills ws caches and ws.y.
void batch_forward(const ExpertModel& model, std::span<const Sample> batch, bool train_mode,
                   Rng* dropout_rng, Workspace& ws) {
    const int L = model.hyper.layers;
    const int H = model.hyper.hidden;
    const int B = static_cast<int>(batch.size());
    if (B == 0) throw ShapeError("batch_forward: empty batch");
    const int n = static_cast<int>(batch[0].points.size());
    if (n < 1) throw ShapeError("batch_forward: empty point sequence");
    for (const auto& s : batch)
        if (static_cast<int>(s.points.size()) != n)
            throw ShapeError("batch_forward: mixed sequence lengths in one minibatch");

    const double p = model.hyper.dropout_p;
    const bool dropout = train_mode && dropout_rng != nullptr && p > 0.0 && L > 1;
    const double keep_scale = p < 1.0 ? 1.0 / (1.0 - p) : 0.0;

    auto cache = [&](std::vector<Matrix>& v) -> std::vector<Matrix>& {
        v.resize(static_cast<size_t>(n) * L);
        return v;
    };
    cache(ws.gi);
    cache(ws.gf);
    cache(ws.gg);
    cache(ws.go);
    cache(ws.c);
    cache(ws.h);
    cache(ws.mask);
    cache(ws.xdrop);
    ws.x0.resize(static_cast<size_t>(n));
    ensure(ws.zero_hb, H, B);
    ws.zero_hb.zero();

    for (int t = 0; t < n; ++t) {
        ensure(ws.x0[static_cast<size_t>(t)], 2, B);
        for (int j = 0; j < B; ++j) {
            ws.x0[static_cast<size_t>(t)].at(0, j) = batch[static_cast<size_t>(j)].points[static_cast<size_t>(t)].theta_in;
            ws.x0[static_cast<size_t>(t)].at(1, j) = batch[static_cast<size_t>(j)].points[static_cast<size_t>(t)].theta_out;
        }
    }

    const size_t hb = static_cast<size_t>(H) * B;
    for (int t = 0; t < n; ++t) {
        const Matrix* xin = &ws.x0[static_cast<size_t>(t)];
        for (int l = 0; l < L; ++l) {
            const auto& layer = model.w.lstm[static_cast<size_t>(l)];
            const size_t idx = static_cast<size_t>(t) * L + l;

            ensure(ws.z, 4 * H, B);
            for (int i = 0; i < 4 * H; ++i) {
                double* zr = ws.z.row(i);
                const double bi = layer.b[static_cast<size_t>(i)];
                for (int j = 0; j < B; ++j) zr[j] = bi;
            }
            gemm_acc(layer.w, *xin, ws.z);
            const Matrix& hprev = (t > 0) ? ws.h[idx - static_cast<size_t>(L)] : ws.zero_hb;
            gemm_acc(layer.u, hprev, ws.z);

            Matrix& I = ws.gi[idx];
            Matrix& F = ws.gf[idx];
            Matrix& G = ws.gg[idx];
            Matrix& O = ws.go[idx];
            Matrix& C = ws.c[idx];
            Matrix& Hh = ws.h[idx];
            ensure(I, H, B);
            ensure(F, H, B);
            ensure(G, H, B);
            ensure(O, H, B);
            ensure(C, H, B);
            ensure(Hh, H, B);

            const double* zi = ws.z.row(0);
            const double* zf = ws.z.row(H);
            const double* zg = ws.z.row(2 * H);
            const double* zo = ws.z.row(3 * H);
            const Matrix& cprev = (t > 0) ? ws.c[idx - static_cast<size_t>(L)] : ws.zero_hb;
            for (size_t k = 0; k < hb; ++k) {
                const double iv = sigmoid(zi[k]);
                const double fv = sigmoid(zf[k]);
                const double gv = std::tanh(zg[k]);
                const double ov = sigmoid(zo[k]);
                const double cv = fv * cprev.a[k] + iv * gv;
                I.a[k] = iv;
                F.a[k] = fv;
                G.a[k] = gv;
                O.a[k] = ov;
                C.a[k] = cv;
                Hh.a[k] = ov * std::tanh(cv);
            }

            if (l < L - 1) {
                if (dropout) {
                    Matrix& M = ws.mask[idx];
                    Matrix& X = ws.xdrop[idx];
                    ensure(M, H, B);
                    ensure(X, H, B);
                    for (size_t k = 0; k < hb; ++k) {
                        const double mv = dropout_rng->uniform() < p ? 0.0 : keep_scale;
                        M.a[k] = mv;
                        X.a[k] = Hh.a[k] * mv;
                    }
                    xin = &X;
                } else {
                    xin = &Hh;
                }
            }
        }
    }

    ensure(ws.y, 4, B);
    for (int i = 0; i < 4; ++i) {
        double* yr = ws.y.row(i);
        for (int j = 0; j < B; ++j) yr[j] = model.w.head_b[static_cast<size_t>(i)];
    }
    gemm_acc(model.w.head_w, ws.h[static_cast<size_t>(n - 1) * L + (L - 1)], ws.y);
}

} // namespace

std::array<double, 4> forward_raw(const ExpertModel& m, const PointSeq& points) {
    WorkspaceHandle ws;
    Sample s;
    s.cfg = m.cfg;
    s.points = points;
    batch_forward(m, std::span<const Sample>(&s, 1), false, nullptr, *ws.p);
    return {ws.p->y.at(0, 0), ws.p->y.at(1, 0), ws.p->y.at(2, 0), ws.p->y.at(3, 0)};
}

LinkageDims predict(const ExpertModel& m, const PointSeq& points) {
    return type_layer(forward_raw(m, points), m.cfg);
}

double batch_loss(const ExpertModel& model, std::span<const Sample> batch, Weights* grads,
                  Rng* dropout_rng, Workspace& ws) {
    const int L = model.hyper.layers;
    const int H = model.hyper.hidden;
    const int B = static_cast<int>(batch.size());
    const bool train_mode = dropout_rng != nullptr;

    batch_forward(model, batch, train_mode, dropout_rng, ws);
    const int n = static_cast<int>(batch[0].points.size());
    const double p = model.hyper.dropout_p;
    const bool dropout = train_mode && p > 0.0 && L > 1;

    // Loss and dL/dy per sample; the 1/B batch average is folded in here.
    const auto signs = type_sign_triple(model.cfg.type_id);
    const double sgn[4] = {static_cast<double>(signs[0]), static_cast<double>(signs[1]),
                           static_cast<double>(signs[2]), 1.0};
    double loss_sum = 0;
    Matrix dy(4, B);
    for (int j = 0; j < B; ++j) {
        std::array<double, 4> h{ws.y.at(0, j), ws.y.at(1, j), ws.y.at(2, j), ws.y.at(3, j)};
        const LinkageDims r_pred = type_layer(h, model.cfg);
        loss_sum += mse_loss(batch[static_cast<size_t>(j)].dims, r_pred);
        if (!grads) continue;

        const auto rp = r_pred.as_array();
        const auto rt = batch[static_cast<size_t>(j)].dims.as_array();
        // dL/dr_pred, averaged over the batch
        double dr[4];
        for (int i = 0; i < 4; ++i) dr[i] = 0.5 * (rp[i] - rt[i]) / B;
        // dL/dT = (1/4) M dL/dr  (r = (1/4) M^T T)
        const double dt[4] = {
            0.25 * (dr[0] - dr[1] + dr[2] - dr[3]),
            0.25 * (dr[0] - dr[1] - dr[2] + dr[3]),
            0.25 * (-dr[0] - dr[1] + dr[2] + dr[3]),
            0.25 * (dr[0] + dr[1] + dr[2] + dr[3]),
        };
        for (int i = 0; i < 4; ++i) dy.at(i, j) = dt[i] * sgn[i] * sigmoid(h[static_cast<size_t>(i)]);
    }
    const double mean_loss = loss_sum / B;
    if (!grads) return mean_loss;

    // Head backward.
    const size_t last = static_cast<size_t>(n - 1) * L + (L - 1);
    gemm_nt_acc(dy, ws.h[last], grads->head_w);
    for (int i = 0; i < 4; ++i) {
        const double* r = dy.row(i);
        double s = 0;
        for (int j = 0; j < B; ++j) s += r[j];
        grads->head_b[static_cast<size_t>(i)] += s;
    }

    const size_t hb = static_cast<size_t>(H) * B;
    auto ensure_layer_buffers = [&](std::vector<Matrix>& v) {
        v.resize(static_cast<size_t>(L));
        for (auto& m2 : v) {
            ensure(m2, H, B);
            m2.zero();
        }
    };
    ensure_layer_buffers(ws.dh_next);
    ensure_layer_buffers(ws.dc_next);
    ensure_layer_buffers(ws.dh_above);

    // dH for the top layer at the last step comes from the head.
    gemm_tn_acc(model.w.head_w, dy, ws.dh_next[static_cast<size_t>(L - 1)]);

    ensure(ws.dz, 4 * H, B);
    ensure(ws.dh_cur, H, B);
    ensure(ws.dc, H, B);
    ensure(ws.tanh_c, H, B);
    ensure(ws.dx, H, B);

    for (int t = n - 1; t >= 0; --t) {
        for (int l = L - 1; l >= 0; --l) {
            const size_t idx = static_cast<size_t>(t) * L + l;
            const auto& layer = model.w.lstm[static_cast<size_t>(l)];
            auto& glayer = grads->lstm[static_cast<size_t>(l)];

            const Matrix& I = ws.gi[idx];
            const Matrix& F = ws.gf[idx];
            const Matrix& G = ws.gg[idx];
            const Matrix& O = ws.go[idx];
            const Matrix& C = ws.c[idx];
            const Matrix& cprev = (t > 0) ? ws.c[idx - static_cast<size_t>(L)] : ws.zero_hb;

            // Collect dH from recurrence, the layer above, and (top,last) head.
            Matrix& dh = ws.dh_cur;
            Matrix& dhn = ws.dh_next[static_cast<size_t>(l)];
            Matrix& dha = ws.dh_above[static_cast<size_t>(l)];
            for (size_t k = 0; k < hb; ++k) dh.a[k] = dhn.a[k] + dha.a[k];

            Matrix& dc = ws.dc;
            Matrix& dcn = ws.dc_next[static_cast<size_t>(l)];
            double* dzi = ws.dz.row(0);
            double* dzf = ws.dz.row(H);
            double* dzg = ws.dz.row(2 * H);
            double* dzo = ws.dz.row(3 * H);
            for (size_t k = 0; k < hb; ++k) {
                const double th = std::tanh(C.a[k]);
                const double dcv = dh.a[k] * O.a[k] * (1.0 - th * th) + dcn.a[k];
                dc.a[k] = dcv;
                const double div = dcv * G.a[k];
                const double dfv = dcv * cprev.a[k];
                const double dgv = dcv * I.a[k];
                const double dov = dh.a[k] * th;
                dzi[k] = div * I.a[k] * (1.0 - I.a[k]);
                dzf[k] = dfv * F.a[k] * (1.0 - F.a[k]);
                dzg[k] = dgv * (1.0 - G.a[k] * G.a[k]);
                dzo[k] = dov * O.a[k] * (1.0 - O.a[k]);
            }

            const Matrix& xin = (l == 0) ? ws.x0[static_cast<size_t>(t)]
                                         : (dropout ? ws.xdrop[idx - 1] : ws.h[idx - 1]);
            gemm_nt_acc(ws.dz, xin, glayer.w);
            if (t > 0) gemm_nt_acc(ws.dz, ws.h[idx - static_cast<size_t>(L)], glayer.u);
            for (int i = 0; i < 4 * H; ++i) {
                const double* r = ws.dz.row(i);
                double s = 0;
                for (int j = 0; j < B; ++j) s += r[j];
                glayer.b[static_cast<size_t>(i)] += s;
            }

            // Push into step t-1 (recurrent) and layer l-1 (input path).
            dhn.zero();
            gemm_tn_acc(layer.u, ws.dz, dhn);
            for (size_t k = 0; k < hb; ++k) dcn.a[k] = dc.a[k] * F.a[k];

            dha.zero();
            if (l > 0) {
                ws.dx.zero();
                gemm_tn_acc(layer.w, ws.dz, ws.dx);
                Matrix& below = ws.dh_above[static_cast<size_t>(l - 1)];
                if (dropout) {
                    const Matrix& M = ws.mask[idx - 1];
                    for (size_t k = 0; k < hb; ++k) below.a[k] += ws.dx.a[k] * M.a[k];
                } else {
                    for (size_t k = 0; k < hb; ++k) below.a[k] += ws.dx.a[k];
                }
            }
        }
    }
    return mean_loss;
}

AdamState AdamState::for_model(const ExpertModel& model) {
    AdamState st;
    st.m.match_shape(model.w);
    st.v.match_shape(model.w);
    return st;
}

namespace {

void adam_update_vec(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                     std::vector<double>& v, double lr, double wd, double b1, double b2, double eps,
                     double bc1, double bc2) {
    for (size_t k = 0; k < w.size(); ++k) {
        const double ge = g[k] + wd * w[k];
        m[k] = b1 * m[k] + (1.0 - b1) * ge;
        v[k] = b2 * v[k] + (1.0 - b2) * ge * ge;
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        w[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

void adam_step(Weights& w, const Weights& grads, AdamState& st, double lr, double weight_decay) {
    st.t += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (size_t l = 0; l < w.lstm.size(); ++l) {
        adam_update_vec(w.lstm[l].w.a, grads.lstm[l].w.a, st.m.lstm[l].w.a, st.v.lstm[l].w.a, lr,
                        weight_decay, st.beta1, st.beta2, st.eps, bc1, bc2);
        adam_update_vec(w.lstm[l].u.a, grads.lstm[l].u.a, st.m.lstm[l].u.a, st.v.lstm[l].u.a, lr,
                        weight_decay, st.beta1, st.beta2, st.eps, bc1, bc2);
        adam_update_vec(w.lstm[l].b, grads.lstm[l].b, st.m.lstm[l].b, st.v.lstm[l].b, lr,
                        weight_decay, st.beta1, st.beta2, st.eps, bc1, bc2);
    }
    adam_update_vec(w.head_w.a, grads.head_w.a, st.m.head_w.a, st.v.head_w.a, lr, weight_decay,
                    st.beta1, st.beta2, st.eps, bc1, bc2);
    adam_update_vec(w.head_b, grads.head_b, st.m.head_b, st.v.head_b, lr, weight_decay, st.beta1,
                    st.beta2, st.eps, bc1, bc2);
}

double lr_at_epoch(const ExpertHyperParams& hyper, int epoch) {
    int passed = 0;
    for (int m : hyper.schedule_milestones)
        if (m <= epoch) ++passed;
    return hyper.lr * std::pow(hyper.gamma, static_cast<double>(passed));
}

TrainState init_training(const TypeConfig& cfg, const ExpertHyperParams& hyper) {
    TrainState st;
    Rng init_rng = Rng::derive(hyper.seed, 0x696e6974); // weight init stream
    st.model = init_model(cfg, hyper, init_rng);
    st.adam = AdamState::for_model(st.model);
    st.dropout_rng = Rng::derive(hyper.seed, 0x64726f70); // dropout stream
    st.stream_rng = Rng(hyper.seed).state();
    return st;
}

std::vector<Sample> make_probe_set(const TypeConfig& cfg, const ExpertHyperParams& hyper, int count) {
    GenConfig gen;
    gen.type_cfg = cfg;
    gen.n_lo = hyper.n_min;
    gen.n_hi = hyper.n_max;
    gen.seed = hyper.seed ^ 0x70726f6265ULL; // independent probe stream
    SampleStream stream(gen);
    std::vector<Sample> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(stream.next());
    return out;
}

namespace {

double probe_metric(const ExpertModel& model, const std::vector<Sample>& probe) {
    if (probe.empty()) return 0.0;
    double sum = 0;
    for (const auto& s : probe) {
        const LinkageDims r = predict(model, s.points);
        // Invalid dims cannot be simulated; count them at the metric's worst value.
        sum += r.is_valid() ? simulation_metric(r, model.cfg, s.points).s_simul : 2.0;
    }
    return sum / static_cast<double>(probe.size());
}

} // namespace

void train_until(TrainState& state, SampleStream& stream, int until_epoch, const TrainOptions& opts) {
    const ExpertHyperParams& hyper = state.model.hyper;
    stream.set_rng_state(state.stream_rng);

    const std::vector<Sample> probe = make_probe_set(state.model.cfg, hyper, hyper.probe_size);
    Weights grads;
    grads.match_shape(state.model.w);
    WorkspaceHandle ws;
    std::vector<Sample> batch;

    for (int epoch = state.epoch; epoch < until_epoch; ++epoch) {
        const double lr = lr_at_epoch(hyper, epoch);
        double loss_sum = 0;
        int seen = 0;
        int remaining = hyper.samples_per_epoch;
        while (remaining > 0) {
            const int bsz = std::min(hyper.batch_size, remaining);
            remaining -= bsz;
            const int npts = stream.draw_n();
            batch.clear();
            for (int j = 0; j < bsz; ++j) batch.push_back(stream.next_with_n(npts));
            grads.zero();
            const double loss = batch_loss(state.model, batch, &grads, &state.dropout_rng, *ws.p);
            if (!std::isfinite(loss))
                throw std::runtime_error("train_until: non-finite loss at epoch " +
                                         std::to_string(epoch) + " (step " +
                                         std::to_string(state.adam.t) + ", lr " + std::to_string(lr) + ")");
            adam_step(state.model.w, grads, state.adam, lr, hyper.weight_decay);
            loss_sum += loss * bsz;
            seen += bsz;
        }
        state.report.mean_loss.push_back(loss_sum / seen);
        state.report.probe_s_simul.push_back(probe_metric(state.model, probe));
        state.report.lr.push_back(lr);
        state.epoch = epoch + 1;
        state.stream_rng = stream.rng_state();

        if (opts.verbose) {
            std::printf("epoch %4d  loss %.6f  probe S %.6f  lr %.2e\n", epoch,
                        state.report.mean_loss.back(), state.report.probe_s_simul.back(), lr);
            std::fflush(stdout);
        }
        if (!opts.checkpoint_path.empty() && opts.checkpoint_interval > 0 &&
            (epoch + 1) % opts.checkpoint_interval == 0 && epoch + 1 < until_epoch)
            save_checkpoint(opts.checkpoint_path, state);
    }
    if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, state);
}

} // namespace fourbar
