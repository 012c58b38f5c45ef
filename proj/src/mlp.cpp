#include "wanpm/mlp.hpp"

#include <cmath>

#include <json.hpp>

#include "wanpm/error.hpp"
#include "wanpm/io.hpp"

namespace wanpm {
namespace {

constexpr const char* kFormat = "wanpm-mlp";
constexpr int kVersion = 1;

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void check_params(const MlpSpec& spec, Eigen::Index n_params) {
    if (n_params != spec.parameter_count())
        throw ContractError("parameter vector has length " + std::to_string(n_params) + ", spec needs " +
                            std::to_string(spec.parameter_count()));
}

}  // namespace

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1) throw ContractError("MLP input and output widths must be >= 1");
    for (int w : hidden_widths)
        if (w < 1) throw ContractError("MLP hidden widths must be >= 1");
}

std::vector<int> MlpSpec::layer_sizes() const {
    std::vector<int> sizes{input_dim};
    sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
    sizes.push_back(output_dim);
    return sizes;
}

Eigen::Index MlpSpec::parameter_count() const {
    const auto sizes = layer_sizes();
    Eigen::Index count = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        count += static_cast<Eigen::Index>(sizes[l + 1]) * (sizes[l] + 1);
    return count;
}

Vector glorot_init(const MlpSpec& spec, RandomStream& stream) {
    spec.validate();
    const auto sizes = spec.layer_sizes();
    Vector params = Vector::Zero(spec.parameter_count());
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(in) * out; ++k)
            params(offset + k) = stream.uniform(-limit, limit);
        offset += static_cast<Eigen::Index>(in) * out + out;
    }
    return params;
}

Matrix forward(const MlpSpec& spec, const Vector& params, const Matrix& input) {
    spec.validate();
    check_params(spec, params.size());
    if (input.cols() != spec.input_dim)
        throw ContractError("forward: input has " + std::to_string(input.cols()) + " columns, spec expects " +
                            std::to_string(spec.input_dim));
    const auto sizes = spec.layer_sizes();
    Matrix h = input;
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        const RowMajorMap weight(params.data() + offset, out, in);
        const Eigen::Map<const Eigen::RowVectorXd> bias(params.data() + offset + static_cast<Eigen::Index>(out) * in, out);
        Matrix next = h * weight.transpose();
        next.rowwise() += bias;
        if (l + 2 < sizes.size()) next = next.array().tanh().matrix();
        h = std::move(next);
        offset += static_cast<Eigen::Index>(out) * in + out;
    }
    return h;
}

ad::Var forward(const MlpSpec& spec, ad::Var params, ad::Var input) {
    spec.validate();
    check_params(spec, params.rows());
    if (input.cols() != spec.input_dim) throw ContractError("forward: input width does not match spec");
    const auto sizes = spec.layer_sizes();
    ad::Var h = input;
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        h = ad::affine(h, params, offset, in, out);
        if (l + 2 < sizes.size()) h = ad::tanh(h);
        offset += static_cast<Eigen::Index>(out) * in + out;
    }
    return h;
}

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint) {
    checkpoint.spec.validate();
    check_params(checkpoint.spec, checkpoint.params.size());
    nlohmann::ordered_json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["header"] = checkpoint.header;
    doc["spec"] = {{"input_dim", checkpoint.spec.input_dim},
                   {"hidden_widths", checkpoint.spec.hidden_widths},
                   {"output_dim", checkpoint.spec.output_dim},
                   {"activation", "tanh"},
                   {"layout", "per layer: W (out x in, row-major) then b"}};
    std::vector<double> values(checkpoint.params.data(), checkpoint.params.data() + checkpoint.params.size());
    doc["params"] = values;
    io::write_text(path, doc.dump(1) + "\n");
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kFormat)
            throw ConfigError("not a model checkpoint: " + path.string());
        if (doc.at("version").get<int>() != kVersion)
            throw ConfigError("unsupported checkpoint version in " + path.string());
        ModelCheckpoint out;
        const auto& spec = doc.at("spec");
        out.spec.input_dim = spec.at("input_dim").get<int>();
        out.spec.hidden_widths = spec.at("hidden_widths").get<std::vector<int>>();
        out.spec.output_dim = spec.at("output_dim").get<int>();
        const auto values = doc.at("params").get<std::vector<double>>();
        out.params = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        if (doc.contains("header")) out.header = doc.at("header").get<std::map<std::string, std::string>>();
        out.spec.validate();
        check_params(out.spec, out.params.size());
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
    } catch (const ContractError& e) {
        throw ConfigError("inconsistent checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace wanpm
