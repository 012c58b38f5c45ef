#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wanpm/drift.hpp"
#include "wanpm/random.hpp"
#include "wanpm/tape.hpp"

namespace wanpm {

/// Dense tanh network. Hidden layers use tanh, the output layer is affine.
///
/// Flat parameter layout, layer by layer from the input: the weight matrix
/// W (out x in) in row-major order, then the bias b (out).
struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden_widths;
    int output_dim = 1;

    void validate() const;
    [[nodiscard]] std::vector<int> layer_sizes() const;
    [[nodiscard]] Eigen::Index parameter_count() const;
    bool operator==(const MlpSpec&) const = default;
};

/// Weights uniform on +-sqrt(6 / (fan_in + fan_out)), biases zero.
Vector glorot_init(const MlpSpec& spec, RandomStream& stream);

/// Plain forward pass of a B x input_dim batch.
Matrix forward(const MlpSpec& spec, const Vector& params, const Matrix& input);

/// Same computation recorded on a tape.
ad::Var forward(const MlpSpec& spec, ad::Var params, ad::Var input);

struct ModelCheckpoint {
    MlpSpec spec;
    Vector params;
    std::map<std::string, std::string> header;
};

/// Versioned JSON checkpoint. `header` holds free-form string fields that
/// wrappers (pushforward kind, dimensions) attach.
void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wanpm
