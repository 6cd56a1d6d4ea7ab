#include "fourbar/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <utility>

#include <json.hpp>

namespace fourbar {

namespace {

constexpr char kMagic[8] = {'F', 'B', 'L', 'S', 'T', 'M', '0', '1'};

using nlohmann::json;

json hyper_to_json(const ExpertHyperParams& h) {
    return json{
        {"layers", h.layers},
        {"hidden", h.hidden},
        {"dropout_p", h.dropout_p},
        {"lr", h.lr},
        {"weight_decay", h.weight_decay},
        {"schedule_milestones", h.schedule_milestones},
        {"gamma", h.gamma},
        {"epochs", h.epochs},
        {"samples_per_epoch", h.samples_per_epoch},
        {"batch_size", h.batch_size},
        {"n_min", h.n_min},
        {"n_max", h.n_max},
        {"probe_size", h.probe_size},
        {"seed", h.seed},
    };
}

ExpertHyperParams hyper_from_json(const json& j) {
    ExpertHyperParams h;
    h.layers = j.at("layers");
    h.hidden = j.at("hidden");
    h.dropout_p = j.at("dropout_p");
    h.lr = j.at("lr");
    h.weight_decay = j.at("weight_decay");
    h.schedule_milestones = j.at("schedule_milestones").get<std::vector<int>>();
    h.gamma = j.at("gamma");
    h.epochs = j.at("epochs");
    h.samples_per_epoch = j.at("samples_per_epoch");
    h.batch_size = j.at("batch_size");
    h.n_min = j.at("n_min");
    h.n_max = j.at("n_max");
    h.probe_size = j.at("probe_size");
    h.seed = j.at("seed");
    return h;
}

json rng_state_to_json(const Rng::state_type& s) { return json{s[0], s[1], s[2], s[3]}; }

Rng::state_type rng_state_from_json(const json& j) {
    return {j.at(0).get<std::uint64_t>(), j.at(1).get<std::uint64_t>(),
            j.at(2).get<std::uint64_t>(), j.at(3).get<std::uint64_t>()};
}

struct NamedArray {
    std::string name;
    std::vector<double>* data;
};

std::vector<NamedArray> array_directory(TrainState& st) {
    std::vector<NamedArray> arrays;
    auto add = [&arrays](const std::string& prefix, Weights& w) {
        for_each_param(w, [&arrays, &prefix](const std::string& name, std::vector<double>& v) {
            arrays.push_back({prefix + name, &v});
        });
    };
    add("", st.model.w);
    add("adam.m.", st.adam.m);
    add("adam.v.", st.adam.v);
    return arrays;
}

} // namespace

void save_checkpoint(const std::string& path, const TrainState& state) {
    TrainState& st = const_cast<TrainState&>(state); // directory needs mutable refs; data untouched
    auto arrays = array_directory(st);

    json header{
        {"format_version", 1},
        {"type", {{"type_id", st.model.cfg.type_id}, {"inversion", inversion_sign(st.model.cfg.inversion)}}},
        {"hyper", hyper_to_json(st.model.hyper)},
        {"epoch", st.epoch},
        {"adam_step", st.adam.t},
        {"rng", {{"dropout", rng_state_to_json(st.dropout_rng.state())},
                 {"stream", rng_state_to_json(st.stream_rng)}}},
        {"report", {{"mean_loss", st.report.mean_loss},
                    {"probe_s_simul", st.report.probe_s_simul},
                    {"lr", st.report.lr}}},
    };
    json dir = json::array();
    for (const auto& a : arrays) dir.push_back(json{{"name", a.name}, {"size", a.data->size()}});
    header["arrays"] = dir;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
        os.write(kMagic, sizeof kMagic);
        const std::string hs = header.dump();
        const std::uint64_t len = hs.size();
        os.write(reinterpret_cast<const char*>(&len), sizeof len);
        os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
        for (const auto& a : arrays)
            os.write(reinterpret_cast<const char*>(a.data->data()),
                     static_cast<std::streamsize>(a.data->size() * sizeof(double)));
        if (!os) throw std::runtime_error("write failed: " + tmp);
    }
    std::remove(path.c_str());
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move checkpoint into place: " + path);
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string hs(len, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(len));
    if (!is) throw std::runtime_error("truncated checkpoint header: " + path);
    const json header = json::parse(hs);
    if (header.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version in " + path);

    TrainState st;
    const auto& jt = header.at("type");
    TypeConfig cfg{jt.at("type_id").get<int>(), inversion_from_sign(jt.at("inversion").get<int>())};
    const ExpertHyperParams hyper = hyper_from_json(header.at("hyper"));
    st = init_training(cfg, hyper); // allocates the right shapes
    st.epoch = header.at("epoch");
    st.adam.t = header.at("adam_step");
    st.dropout_rng.set_state(rng_state_from_json(header.at("rng").at("dropout")));
    st.stream_rng = rng_state_from_json(header.at("rng").at("stream"));
    st.report.mean_loss = header.at("report").at("mean_loss").get<std::vector<double>>();
    st.report.probe_s_simul = header.at("report").at("probe_s_simul").get<std::vector<double>>();
    st.report.lr = header.at("report").at("lr").get<std::vector<double>>();

    auto arrays = array_directory(st);
    const auto& dir = header.at("arrays");
    if (dir.size() != arrays.size())
        throw std::runtime_error("checkpoint array directory mismatch in " + path);
    for (size_t i = 0; i < arrays.size(); ++i) {
        const auto& entry = dir.at(i);
        if (entry.at("name").get<std::string>() != arrays[i].name ||
            entry.at("size").get<size_t>() != arrays[i].data->size())
            throw std::runtime_error("checkpoint array " + arrays[i].name + " mismatch in " + path);
        is.read(reinterpret_cast<char*>(arrays[i].data->data()),
                static_cast<std::streamsize>(arrays[i].data->size() * sizeof(double)));
    }
    if (!is) throw std::runtime_error("truncated checkpoint arrays: " + path);
    return st;
}

} // namespace fourbar
