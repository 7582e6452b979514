#include "facet/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "facet/errors.hpp"

namespace facet {

using nlohmann::json;

namespace {

json spec_to_json(const NetworkSpec& spec) {
    json j;
    j["input_dim"] = spec.input_dim;
    j["encoder_widths"] = spec.encoder_widths;
    json acts = json::array();
    for (std::size_t l = 0; l < spec.encoder_widths.size(); ++l) {
        const Activation a = spec.encoder_activations.empty()
                                 ? Activation::relu
                                 : spec.encoder_activations[l];
        acts.push_back(to_string(a));
    }
    j["encoder_activations"] = acts;
    j["gru_widths"] = spec.gru_widths;
    j["class_count"] = spec.class_count;
    return j;
}

NetworkSpec spec_from_json(const json& j) {
    NetworkSpec spec;
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
    spec.gru_widths = j.at("gru_widths").get<std::vector<std::size_t>>();
    spec.class_count = j.at("class_count").get<std::size_t>();
    if (j.contains("encoder_activations")) {
        for (const auto& s : j.at("encoder_activations")) {
            spec.encoder_activations.push_back(activation_from_string(s.get<std::string>()));
        }
    }
    spec.validate();
    return spec;
}

} // namespace

std::string checkpoint_to_json(const NetworkState& net, std::uint64_t seed) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["spec"] = spec_to_json(net.spec);
    j["seed"] = seed;
    json params = json::object();
    net.for_each_param([&](const std::string& name, const Tensor& t) {
        params[name] = t.raw();
    });
    j["parameters"] = std::move(params);
    return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("checkpoint parse error: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
            throw config_error("unsupported checkpoint format_version");
        }
        Checkpoint ck;
        ck.seed = j.at("seed").get<std::uint64_t>();
        const NetworkSpec spec = spec_from_json(j.at("spec"));
        // Structure first (correct shapes), then overwrite every tensor.
        ck.net = init_network(spec, 0);
        const json& params = j.at("parameters");
        ck.net.for_each_param([&](const std::string& name, Tensor& t) {
            const auto values = params.at(name).get<std::vector<double>>();
            if (values.size() != t.size()) {
                throw config_error("checkpoint parameter " + name + " has wrong size");
            }
            t.raw() = values;
        });
        return ck;
    } catch (const json::exception& e) {
        throw config_error(std::string("checkpoint field error: ") + e.what());
    }
}

void save_checkpoint(const NetworkState& net, std::uint64_t seed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write checkpoint: " + path);
    out << checkpoint_to_json(net, seed) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

} // namespace facet
