#include "shapesense/nn/model_io.hpp"

#include <json.hpp>

#include "shapesense/errors.hpp"

namespace shapesense::nn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "shapesense-model";
constexpr int kVersion = 1;

json layer_json(const LayerSpec& l) {
    json j;
    switch (l.kind) {
        case LayerKind::conv:
            j = {{"kind", "conv"}, {"kernels", l.units}, {"size", l.kernel_size}};
            break;
        case LayerKind::dense:
            j = {{"kind", "dense"}, {"units", l.units}};
            break;
        case LayerKind::flatten:
            return {{"kind", "flatten"}};
    }
    j["activation"] = std::string(to_string(l.activation));
    return j;
}

LayerSpec layer_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "flatten") return LayerSpec::flatten();
    const auto act = activation_from_string(j.at("activation").get<std::string>());
    if (kind == "conv") return LayerSpec::conv(j.at("kernels").get<int>(), j.at("size").get<int>(), act);
    if (kind == "dense") return LayerSpec::dense(j.at("units").get<int>(), act);
    throw SchemaError("unknown layer kind '" + kind + "'");
}

json spec_json(const ModelSpec& spec) {
    json layers = json::array();
    for (const auto& l : spec.layers) layers.push_back(layer_json(l));
    return {{"name", spec.name}, {"input", spec.input}, {"layers", layers}};
}

ModelSpec spec_from(const json& j) {
    ModelSpec spec;
    spec.name = j.value("name", "");
    if (j.contains("input")) spec.input = j.at("input").get<std::array<std::size_t, 3>>();
    for (const auto& l : j.at("layers")) spec.layers.push_back(layer_from(l));
    try {
        (void)spec.shapes();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("invalid model spec: ") + e.what());
    }
    return spec;
}

template <typename Fn>
auto guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace

std::string spec_to_json(const ModelSpec& spec) { return spec_json(spec).dump(); }

ModelSpec spec_from_json(std::string_view text) {
    return guarded([&] { return spec_from(json::parse(text)); });
}

std::string model_to_json(const Model& model) {
    json params = json::array();
    for (std::size_t p = 0; p + 1 < model.params.size(); p += 2) {
        params.push_back({{"weight_shape", model.params[p].shape},
                          {"weight", model.params[p].data},
                          {"bias", model.params[p + 1].data}});
    }
    json j = {{"format", kFormat}, {"version", kVersion}, {"spec", spec_json(model.spec)}, {"params", params}};
    if (model.norm) j["norm"] = {{"mu", model.norm->mu}, {"sigma", model.norm->sigma}};
    return j.dump();
}

Model model_from_json(std::string_view text) {
    return guarded([&] {
        const auto j = json::parse(text);
        if (j.at("format").get<std::string>() != kFormat) throw SchemaError("not a shapesense model file");
        if (j.at("version").get<int>() != kVersion) throw SchemaError("unsupported model file version");

        Model model = Model::zeros(spec_from(j.at("spec")));
        const auto& params = j.at("params");
        if (params.size() * 2 != model.params.size())
            throw SchemaError("model file has " + std::to_string(params.size()) +
                              " parameter groups, spec needs " + std::to_string(model.params.size() / 2));
        for (std::size_t g = 0; g < params.size(); ++g) {
            auto& w = model.params[2 * g];
            auto& b = model.params[2 * g + 1];
            if (params[g].at("weight_shape").get<Shape>() != w.shape)
                throw SchemaError("weight shape mismatch in parameter group " + std::to_string(g));
            auto wd = params[g].at("weight").get<std::vector<double>>();
            auto bd = params[g].at("bias").get<std::vector<double>>();
            if (wd.size() != w.size() || bd.size() != b.size())
                throw SchemaError("parameter length mismatch in group " + std::to_string(g));
            w.data = std::move(wd);
            b.data = std::move(bd);
            if (!w.all_finite() || !b.all_finite()) throw SchemaError("non-finite parameter");
        }
        if (j.contains("norm")) {
            NormStats norm;
            const auto& n = j.at("norm");
            const auto mu = n.at("mu").get<std::vector<double>>();
            const auto sigma = n.at("sigma").get<std::vector<double>>();
            if (mu.size() != kChannels || sigma.size() != kChannels)
                throw SchemaError("normalization statistics need 16 mu and 16 sigma values");
            for (int c = 0; c < kChannels; ++c) {
                norm.mu[c] = mu[c];
                norm.sigma[c] = sigma[c];
                if (!(sigma[c] >= kSigmaFloor)) throw SchemaError("sigma below floor");
            }
            model.norm = norm;
        }
        return model;
    });
}

}  // namespace shapesense::nn
