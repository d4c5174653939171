#include "cep/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cep/error.hpp"

namespace cep {
namespace {

using nlohmann::json;

json layer_json(const nn::Dense& d) { return json{{"weight", d.weight}, {"bias", d.bias}}; }

json mlp_json(const nn::MLPParams& p) {
    return json{{"input_dim", p.input_dim()},
                {"hidden_dim", p.hidden_dim()},
                {"output_dim", p.num_classes()},
                {"hidden", layer_json(p.hidden)},
                {"output", layer_json(p.output)}};
}

nn::Dense layer_from(const json& j, std::size_t in, std::size_t out) {
    nn::Dense d{in, out, j.at("weight").get<std::vector<double>>(), j.at("bias").get<std::vector<double>>()};
    if (d.weight.size() != in * out || d.bias.size() != out) throw ValidationError("checkpoint: layer shape mismatch");
    return d;
}

nn::MLPParams mlp_from(const json& j) {
    const auto d = j.at("input_dim").get<std::size_t>();
    const auto h = j.at("hidden_dim").get<std::size_t>();
    const auto c = j.at("output_dim").get<std::size_t>();
    nn::MLPParams p{layer_from(j.at("hidden"), d, h), layer_from(j.at("output"), h, c)};
    if (!p.all_finite()) throw ValidationError("checkpoint: non-finite parameter");
    return p;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    json j{{"format", "cep-checkpoint"}, {"version", 1}, {"kind", ckpt.kind}, {"seed", ckpt.seed}};
    j["models"]["classifier"] = mlp_json(ckpt.classifier);
    if (ckpt.head) {
        j["models"]["head"] = mlp_json(*ckpt.head);
        j["window"] = ckpt.window;
    }
    return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        if (j.at("format") != "cep-checkpoint") throw ValidationError("checkpoint: unknown format");
        if (j.at("version") != 1) throw ValidationError("checkpoint: unsupported version");
        Checkpoint c;
        c.kind = j.at("kind").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.classifier = mlp_from(j.at("models").at("classifier"));
        if (j.at("models").contains("head")) {
            c.head = mlp_from(j.at("models").at("head"));
            c.window = j.at("window").get<std::size_t>();
        }
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << checkpoint_to_json(ckpt) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace cep
