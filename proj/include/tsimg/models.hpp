#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tsimg/alignment.hpp"
#include "tsimg/imaging.hpp"
#include "tsimg/params.hpp"

namespace tsimg {

/// WithoutLVM: patch projection + token-wise linear layer.
/// LVM2Attn: patch projection + one multi-head self-attention layer.
/// MiniMAE: patch projection + attention and feed-forward sublayers; the only
/// architecture with a reconstruction decoder.
enum class Arch { WithoutLVM, LVM2Attn, MiniMAE };

/// Classify: linear probe over pooled tokens (framework b).
/// ForecastLinear: linear head over flattened tokens (framework c).
/// ForecastReconstruct: masked-patch reconstruction (framework d).
enum class Task { Classify, ForecastLinear, ForecastReconstruct };

std::string_view to_string(Arch arch);
std::string_view to_string(Task task);
std::optional<Arch> parse_arch(std::string_view name);
std::optional<Task> parse_task(std::string_view name);

struct ModelConfig {
  Arch arch = Arch::LVM2Attn;
  Task task = Task::ForecastLinear;
  int embed_dim = 64;
  int num_heads = 4;
  int patch_size = 8;
  int image_size = 64;
  int mlp_ratio = 2;
  int num_inputs = 1;       // images per classification sample (variates, or 1 for MVH)
  int num_classes = 2;      // classification head width
  int horizon = 96;         // forecast length per output channel
  int output_channels = 1;  // forecast channels per sample (d for MVH, else 1)

  int grid() const { return image_size / patch_size; }
  int num_patches() const { return grid() * grid(); }
  int patch_dim() const { return 3 * patch_size * patch_size; }
  int head_dim() const { return embed_dim / num_heads; }
  int mlp_hidden() const { return embed_dim * mlp_ratio; }

  void validate() const;
};

/// Table-1 routing. Reconstruction forecasting needs an architecture with a
/// decoder (MiniMAE) and value-preserving imaging (UVH or MVH). Throws RoutingError.
void validate_routing(Task task, Arch arch, ImagingMethod imaging);

/// Xavier-uniform projections, zero biases, unit/zero layer-norm, 2D sine-cosine
/// position embeddings (trainable), N(0, 0.02) mask token.
ParamSet init_params(const ModelConfig& config, std::uint64_t seed);

/// Trainable scalar count implied by the config's tensor shapes.
std::size_t parameter_count(const ModelConfig& config);

/// tokens = patches * W_e + b + position; masked rows use mask_token + position.
Matrix forward_embed(const PatchSequence& seq, const ParamSet& params,
                     const std::vector<bool>& masked = {});

struct AttentionOutput {
  Matrix output;                 // LN(tokens + MHA(tokens))
  std::vector<Matrix> weights;   // one N x N row-stochastic matrix per head
};

AttentionOutput forward_attention(const Matrix& tokens, const ParamSet& params, int num_heads);

/// Full encoder for the configured architecture (embedding + middle layers).
Matrix forward_encoder(const PatchSequence& seq, const ParamSet& params, const ModelConfig& config,
                       const std::vector<bool>& masked = {});

/// Mean-pools each variate's tokens, concatenates, applies the linear head.
Vector forward_classify(const std::vector<Matrix>& tokens_per_variate, const ParamSet& params);

/// Argmax; ties resolve to the lowest class index.
int argmax_class(const Vector& logits);

/// Flattens tokens row-major and applies the linear head.
Vector forward_forecast_linear(const Matrix& tokens, const ParamSet& params, int horizon);

/// Masked tokens become mask_token + position, the encoder runs, the linear
/// decoder produces patches; unmasked output patches are the input patches.
PatchSequence forward_reconstruct(const PatchSequence& seq, const ForecastMask& mask, const ParamSet& params,
                                  const ModelConfig& config);

/// One training example. Fields used depend on the task.
struct Example {
  std::vector<PatchSequence> inputs;  // one per image (classification may have several)
  int label = -1;                     // Classify
  Vector target;                      // ForecastLinear, normalized units
  Matrix target_patches;              // ForecastReconstruct
  ForecastMask mask;                  // ForecastReconstruct
};

enum class LossKind { CrossEntropy, Mse, MaskedMse };
LossKind loss_kind_for(Task task);

struct LossAndGrad {
  double loss = 0.0;
  GradSet grads;
};

/// Mean loss over `batch` and its exact gradient. Reconstruction loss only
/// covers masked patches. Throws NonFiniteLoss.
LossAndGrad backward(LossKind kind, std::span<const Example> batch, const ParamSet& params,
                     const ModelConfig& config);

/// Forward-only mean loss (same definition as backward).
double compute_loss(LossKind kind, std::span<const Example> batch, const ParamSet& params,
                    const ModelConfig& config);

}  // namespace tsimg
