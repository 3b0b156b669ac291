#include "tsimg/models.hpp"

#include <cmath>
#include <numbers>

#include "tsimg/error.hpp"
#include "tsimg/rng.hpp"
#include "tsimg/training.hpp"

namespace tsimg {

namespace {

constexpr double kLayerNormEps = 1e-6;

// Tensor names.
const std::string kEmbedWeight = "embed.weight";
const std::string kEmbedBias = "embed.bias";
const std::string kPosition = "embed.position";
const std::string kMaskToken = "embed.mask_token";
const std::string kMixerWeight = "mixer.weight";
const std::string kMixerBias = "mixer.bias";
const std::string kQuery = "attn.query";
const std::string kKey = "attn.key";
const std::string kValue = "attn.value";
const std::string kAttnOutWeight = "attn.out.weight";
const std::string kAttnOutBias = "attn.out.bias";
const std::string kAttnNormScale = "attn.norm.scale";
const std::string kAttnNormShift = "attn.norm.shift";
const std::string kFc1Weight = "mlp.fc1.weight";
const std::string kFc1Bias = "mlp.fc1.bias";
const std::string kFc2Weight = "mlp.fc2.weight";
const std::string kFc2Bias = "mlp.fc2.bias";
const std::string kMlpNormScale = "mlp.norm.scale";
const std::string kMlpNormShift = "mlp.norm.shift";
const std::string kHeadWeight = "head.weight";
const std::string kHeadBias = "head.bias";

Matrix add_bias(const Matrix& m, const Matrix& bias) { return m.rowwise() + bias.row(0); }

// ---------------------------------------------------------------- layer norm

struct NormTrace {
  Matrix normalized;
  Vector inv_std;
};

Matrix layer_norm(const Matrix& x, const Matrix& scale, const Matrix& shift, NormTrace& tr) {
  const auto n = x.rows();
  tr.normalized.resize(n, x.cols());
  tr.inv_std.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = x.row(r).mean();
    const Eigen::ArrayXXd centered = x.row(r).array() - mu;
    const double inv = 1.0 / std::sqrt(centered.square().mean() + kLayerNormEps);
    tr.normalized.row(r) = centered.matrix() * inv;
    tr.inv_std(r) = inv;
  }
  return (tr.normalized.array().rowwise() * scale.row(0).array()).rowwise() + shift.row(0).array();
}

Matrix layer_norm_backward(const Matrix& dy, const NormTrace& tr, const Matrix& scale, Matrix& dscale,
                           Matrix& dshift) {
  dscale += (dy.array() * tr.normalized.array()).colwise().sum().matrix();
  dshift += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * scale.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double m1 = dxhat.row(r).mean();
    const double m2 = (dxhat.row(r).array() * tr.normalized.row(r).array()).mean();
    dx.row(r) = tr.inv_std(r) * (dxhat.row(r).array() - m1 - tr.normalized.row(r).array() * m2).matrix();
  }
  return dx;
}

// ------------------------------------------------------------------ attention

struct AttentionTrace {
  Matrix input;
  Matrix q, k, v;
  Matrix concat;
  std::vector<Matrix> weights;
  NormTrace norm;
};

void softmax_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double top = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - top).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

Matrix attention_layer(const Matrix& x, const ParamSet& p, int heads, AttentionTrace& tr) {
  const auto D = x.cols();
  const auto dh = D / heads;
  const double c = 1.0 / std::sqrt(static_cast<double>(dh));
  tr.input = x;
  tr.q = x * p.at(kQuery);
  tr.k = x * p.at(kKey);
  tr.v = x * p.at(kValue);
  tr.concat.resize(x.rows(), D);
  tr.weights.resize(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Matrix scores = c * (tr.q.middleCols(h * dh, dh) * tr.k.middleCols(h * dh, dh).transpose());
    softmax_rows(scores);
    tr.concat.middleCols(h * dh, dh) = scores * tr.v.middleCols(h * dh, dh);
    tr.weights[h] = std::move(scores);
  }
  const Matrix residual = x + add_bias(tr.concat * p.at(kAttnOutWeight), p.at(kAttnOutBias));
  return layer_norm(residual, p.at(kAttnNormScale), p.at(kAttnNormShift), tr.norm);
}

Matrix attention_backward(const Matrix& dy, const AttentionTrace& tr, const ParamSet& p, int heads, GradSet& g) {
  const Matrix dres = layer_norm_backward(dy, tr.norm, p.at(kAttnNormScale), g.at(kAttnNormScale),
                                          g.at(kAttnNormShift));
  const auto D = dres.cols();
  const auto dh = D / heads;
  const double c = 1.0 / std::sqrt(static_cast<double>(dh));
  g.at(kAttnOutWeight) += tr.concat.transpose() * dres;
  g.at(kAttnOutBias) += dres.colwise().sum();
  const Matrix dconcat = dres * p.at(kAttnOutWeight).transpose();
  Matrix dq(dres.rows(), D), dk(dres.rows(), D), dv(dres.rows(), D);
  for (int h = 0; h < heads; ++h) {
    const Matrix& A = tr.weights[h];
    const auto dO = dconcat.middleCols(h * dh, dh);
    const Matrix dA = dO * tr.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh) = A.transpose() * dO;
    const Vector row_dot = (dA.array() * A.array()).rowwise().sum();
    const Matrix dS = A.array() * (dA.array().colwise() - row_dot.array());
    dq.middleCols(h * dh, dh) = c * (dS * tr.k.middleCols(h * dh, dh));
    dk.middleCols(h * dh, dh) = c * (dS.transpose() * tr.q.middleCols(h * dh, dh));
  }
  g.at(kQuery) += tr.input.transpose() * dq;
  g.at(kKey) += tr.input.transpose() * dk;
  g.at(kValue) += tr.input.transpose() * dv;
  return dres + dq * p.at(kQuery).transpose() + dk * p.at(kKey).transpose() + dv * p.at(kValue).transpose();
}

// ---------------------------------------------------------------- feed-forward

constexpr double kGeluA = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluB = 0.044715;

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluA * (x + kGeluB * x * x * x))); }

double gelu_grad(double x) {
  const double t = std::tanh(kGeluA * (x + kGeluB * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluA * (1.0 + 3.0 * kGeluB * x * x);
}

struct MlpTrace {
  Matrix input;
  Matrix pre;
  Matrix hidden;
  NormTrace norm;
};

Matrix mlp_layer(const Matrix& x, const ParamSet& p, MlpTrace& tr) {
  tr.input = x;
  tr.pre = add_bias(x * p.at(kFc1Weight), p.at(kFc1Bias));
  tr.hidden = tr.pre.unaryExpr(&gelu);
  const Matrix residual = x + add_bias(tr.hidden * p.at(kFc2Weight), p.at(kFc2Bias));
  return layer_norm(residual, p.at(kMlpNormScale), p.at(kMlpNormShift), tr.norm);
}

Matrix mlp_backward(const Matrix& dy, const MlpTrace& tr, const ParamSet& p, GradSet& g) {
  const Matrix dres =
      layer_norm_backward(dy, tr.norm, p.at(kMlpNormScale), g.at(kMlpNormScale), g.at(kMlpNormShift));
  g.at(kFc2Weight) += tr.hidden.transpose() * dres;
  g.at(kFc2Bias) += dres.colwise().sum();
  const Matrix dpre = (dres * p.at(kFc2Weight).transpose()).array() * tr.pre.unaryExpr(&gelu_grad).array();
  g.at(kFc1Weight) += tr.input.transpose() * dpre;
  g.at(kFc1Bias) += dpre.colwise().sum();
  return dres + dpre * p.at(kFc1Weight).transpose();
}

// -------------------------------------------------------------------- encoder

struct EncoderTrace {
  const Matrix* patches = nullptr;
  std::vector<bool> masked;
  Matrix embedded;
  AttentionTrace attn;
  MlpTrace mlp;
  Matrix output;
};

Matrix embed(const Matrix& patches, const ParamSet& p, const std::vector<bool>& masked) {
  Matrix tokens = add_bias(patches * p.at(kEmbedWeight), p.at(kEmbedBias)) + p.at(kPosition);
  if (!masked.empty()) {
    const Matrix& mask_token = p.at(kMaskToken);
    for (Eigen::Index n = 0; n < tokens.rows(); ++n) {
      if (masked[static_cast<std::size_t>(n)]) tokens.row(n) = mask_token.row(0) + p.at(kPosition).row(n);
    }
  }
  return tokens;
}

void run_encoder(const PatchSequence& seq, const ParamSet& p, const ModelConfig& cfg,
                 const std::vector<bool>& masked, EncoderTrace& tr) {
  if (seq.patch_dim() != cfg.patch_dim() || seq.count() != cfg.num_patches()) {
    fail(ErrorCode::ShapeMismatch, "patch sequence does not match the model configuration");
  }
  if (!masked.empty() && static_cast<int>(masked.size()) != seq.count()) {
    fail(ErrorCode::ShapeMismatch, "mask length differs from patch count");
  }
  tr.patches = &seq.patches;
  tr.masked = masked;
  tr.embedded = embed(seq.patches, p, masked);
  switch (cfg.arch) {
    case Arch::WithoutLVM:
      tr.output = add_bias(tr.embedded * p.at(kMixerWeight), p.at(kMixerBias));
      break;
    case Arch::LVM2Attn:
      tr.output = attention_layer(tr.embedded, p, cfg.num_heads, tr.attn);
      break;
    case Arch::MiniMAE: {
      const Matrix attended = attention_layer(tr.embedded, p, cfg.num_heads, tr.attn);
      tr.output = mlp_layer(attended, p, tr.mlp);
      break;
    }
  }
}

void encoder_backward(const Matrix& dout, const EncoderTrace& tr, const ParamSet& p, const ModelConfig& cfg,
                      GradSet& g) {
  Matrix dE;
  switch (cfg.arch) {
    case Arch::WithoutLVM:
      g.at(kMixerWeight) += tr.embedded.transpose() * dout;
      g.at(kMixerBias) += dout.colwise().sum();
      dE = dout * p.at(kMixerWeight).transpose();
      break;
    case Arch::LVM2Attn:
      dE = attention_backward(dout, tr.attn, p, cfg.num_heads, g);
      break;
    case Arch::MiniMAE: {
      const Matrix dattended = mlp_backward(dout, tr.mlp, p, g);
      dE = attention_backward(dattended, tr.attn, p, cfg.num_heads, g);
      break;
    }
  }
  g.at(kPosition) += dE;
  if (!tr.masked.empty()) {
    Matrix& dmask = g.at(kMaskToken);
    for (Eigen::Index n = 0; n < dE.rows(); ++n) {
      if (tr.masked[static_cast<std::size_t>(n)]) {
        dmask += dE.row(n);
        dE.row(n).setZero();
      }
    }
  }
  g.at(kEmbedWeight) += tr.patches->transpose() * dE;
  g.at(kEmbedBias) += dE.colwise().sum();
}

Eigen::RowVectorXd flatten_tokens(const Matrix& tokens) {
  Eigen::RowVectorXd flat(tokens.size());
  for (Eigen::Index n = 0; n < tokens.rows(); ++n) flat.segment(n * tokens.cols(), tokens.cols()) = tokens.row(n);
  return flat;
}

Matrix unflatten_tokens(const Eigen::RowVectorXd& flat, Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  for (Eigen::Index n = 0; n < rows; ++n) out.row(n) = flat.segment(n * cols, cols);
  return out;
}

Matrix xavier(Rng& rng, int fan_in, int fan_out) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-a, a);
  }
  return m;
}

Matrix gaussian(Rng& rng, int rows, int cols, double stddev) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.normal(0.0, stddev);
  }
  return m;
}

// Fixed 2D sine-cosine table: the first half of the width encodes the patch
// row, the second half the column. Widths not divisible by 4 fall back to noise.
Matrix sincos_positions(Rng& rng, int grid, int dim) {
  if (dim % 4 != 0) return gaussian(rng, grid * grid, dim, 0.02);
  const int quarter = dim / 4;
  Matrix m(grid * grid, dim);
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      const int n = r * grid + c;
      for (int i = 0; i < quarter; ++i) {
        const double omega = 1.0 / std::pow(10000.0, static_cast<double>(i) / quarter);
        m(n, i) = std::sin(r * omega);
        m(n, quarter + i) = std::cos(r * omega);
        m(n, 2 * quarter + i) = std::sin(c * omega);
        m(n, 3 * quarter + i) = std::cos(c * omega);
      }
    }
  }
  return m;
}

int head_inputs(const ModelConfig& cfg) {
  switch (cfg.task) {
    case Task::Classify: return cfg.num_inputs * cfg.embed_dim;
    case Task::ForecastLinear: return cfg.num_patches() * cfg.embed_dim;
    case Task::ForecastReconstruct: return cfg.embed_dim;
  }
  return 0;
}

int head_outputs(const ModelConfig& cfg) {
  switch (cfg.task) {
    case Task::Classify: return cfg.num_classes;
    case Task::ForecastLinear: return cfg.horizon * cfg.output_channels;
    case Task::ForecastReconstruct: return cfg.patch_dim();
  }
  return 0;
}

// Loss for one example plus, when `g` is non-null, its gradient scaled by `weight`.
double example_loss(LossKind kind, const Example& ex, const ParamSet& p, const ModelConfig& cfg, GradSet* g,
                    double weight) {
  switch (kind) {
    case LossKind::CrossEntropy: {
      require(static_cast<int>(ex.inputs.size()) == cfg.num_inputs, ErrorCode::ShapeMismatch,
              "classification example has the wrong number of images");
      std::vector<EncoderTrace> traces(ex.inputs.size());
      std::vector<Matrix> tokens;
      tokens.reserve(ex.inputs.size());
      for (std::size_t v = 0; v < ex.inputs.size(); ++v) {
        run_encoder(ex.inputs[v], p, cfg, {}, traces[v]);
        tokens.push_back(traces[v].output);
      }
      const Vector logits = forward_classify(tokens, p);
      const double loss = cross_entropy(logits, ex.label);
      if (g) {
        Eigen::RowVectorXd dlogits = (logits.array() - logits.maxCoeff()).exp().matrix().transpose();
        dlogits /= dlogits.sum();
        dlogits(ex.label) -= 1.0;
        dlogits *= weight;
        Eigen::RowVectorXd features(cfg.num_inputs * cfg.embed_dim);
        for (std::size_t v = 0; v < tokens.size(); ++v) {
          features.segment(static_cast<Eigen::Index>(v) * cfg.embed_dim, cfg.embed_dim) = tokens[v].colwise().mean();
        }
        g->at(kHeadWeight) += features.transpose() * dlogits;
        g->at(kHeadBias) += dlogits;
        const Eigen::RowVectorXd dfeatures = dlogits * p.at(kHeadWeight).transpose();
        for (std::size_t v = 0; v < tokens.size(); ++v) {
          const Eigen::RowVectorXd dpool =
              dfeatures.segment(static_cast<Eigen::Index>(v) * cfg.embed_dim, cfg.embed_dim) /
              static_cast<double>(tokens[v].rows());
          const Matrix dtokens = dpool.replicate(tokens[v].rows(), 1);
          encoder_backward(dtokens, traces[v], p, cfg, *g);
        }
      }
      return loss;
    }
    case LossKind::Mse: {
      require(ex.inputs.size() == 1, ErrorCode::ShapeMismatch, "forecast example needs one image");
      EncoderTrace tr;
      run_encoder(ex.inputs[0], p, cfg, {}, tr);
      const int out = cfg.horizon * cfg.output_channels;
      require(ex.target.size() == out, ErrorCode::ShapeMismatch, "forecast target has the wrong length");
      const Vector pred = forward_forecast_linear(tr.output, p, out);
      const Vector diff = pred - ex.target;
      const double loss = diff.squaredNorm() / out;
      if (g) {
        const Eigen::RowVectorXd dpred = (2.0 * weight / out) * diff.transpose();
        const Eigen::RowVectorXd flat = flatten_tokens(tr.output);
        g->at(kHeadWeight) += flat.transpose() * dpred;
        g->at(kHeadBias) += dpred;
        const Eigen::RowVectorXd dflat = dpred * p.at(kHeadWeight).transpose();
        encoder_backward(unflatten_tokens(dflat, tr.output.rows(), tr.output.cols()), tr, p, cfg, *g);
      }
      return loss;
    }
    case LossKind::MaskedMse: {
      require(ex.inputs.size() == 1, ErrorCode::ShapeMismatch, "reconstruction example needs one image");
      const std::vector<bool> flags = ex.mask.flags();
      require(static_cast<int>(flags.size()) == cfg.num_patches(), ErrorCode::ShapeMismatch,
              "mask grid differs from model grid");
      EncoderTrace tr;
      run_encoder(ex.inputs[0], p, cfg, flags, tr);
      const Matrix decoded = add_bias(tr.output * p.at(kHeadWeight), p.at(kHeadBias));
      const double loss = masked_mse(decoded, ex.target_patches, ex.mask);
      if (g) {
        const double count = static_cast<double>(ex.mask.masked_patch_indices.size()) * decoded.cols();
        Matrix ddecoded = Matrix::Zero(decoded.rows(), decoded.cols());
        for (int idx : ex.mask.masked_patch_indices) {
          ddecoded.row(idx) = (2.0 * weight / count) * (decoded.row(idx) - ex.target_patches.row(idx));
        }
        g->at(kHeadWeight) += tr.output.transpose() * ddecoded;
        g->at(kHeadBias) += ddecoded.colwise().sum();
        encoder_backward(ddecoded * p.at(kHeadWeight).transpose(), tr, p, cfg, *g);
      }
      return loss;
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::WithoutLVM: return "wolvm";
    case Arch::LVM2Attn: return "lvm2attn";
    case Arch::MiniMAE: return "minimae";
  }
  return "unknown";
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Classify: return "classify";
    case Task::ForecastLinear: return "forecast-linear";
    case Task::ForecastReconstruct: return "forecast-reconstruct";
  }
  return "unknown";
}

std::optional<Arch> parse_arch(std::string_view name) {
  for (Arch a : {Arch::WithoutLVM, Arch::LVM2Attn, Arch::MiniMAE}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::Classify, Task::ForecastLinear, Task::ForecastReconstruct}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  require(embed_dim >= 1 && num_heads >= 1, ErrorCode::InvalidArgument, "embed_dim and num_heads must be >= 1");
  require(embed_dim % num_heads == 0, ErrorCode::InvalidArgument, "embed_dim must be divisible by num_heads");
  require(patch_size >= 1 && image_size >= patch_size, ErrorCode::InvalidArgument, "invalid image/patch size");
  if (image_size % patch_size != 0) fail(ErrorCode::IndivisiblePatch, "image_size not divisible by patch_size");
  require(mlp_ratio >= 1, ErrorCode::InvalidArgument, "mlp_ratio must be >= 1");
  require(num_inputs >= 1 && num_classes >= 1 && horizon >= 1 && output_channels >= 1, ErrorCode::InvalidArgument,
          "head dimensions must be >= 1");
  if (task == Task::ForecastReconstruct && arch != Arch::MiniMAE) {
    fail(ErrorCode::RoutingError, "reconstruction forecasting needs the minimae architecture");
  }
}

void validate_routing(Task task, Arch arch, ImagingMethod imaging) {
  if (task != Task::ForecastReconstruct) return;
  if (arch != Arch::MiniMAE) {
    fail(ErrorCode::RoutingError, std::string("forecast-reconstruct needs a model with a reconstruction decoder "
                                              "(minimae); ") + std::string(to_string(arch)) +
                                      " only supports the linear head (forecast-linear)");
  }
  if (!preserves_values(imaging)) {
    fail(ErrorCode::RoutingError,
         "forecast-reconstruct recovers forecasts from reconstructed pixels, which requires an imaging method "
         "that keeps raw values in pixels (uvh or mvh); use forecast-linear with " +
             std::string(to_string(imaging)));
  }
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const int D = cfg.embed_dim;
  ParamSet p;
  p.add(kEmbedWeight, xavier(rng, cfg.patch_dim(), D));
  p.add(kEmbedBias, Matrix::Zero(1, D));
  p.add(kPosition, sincos_positions(rng, cfg.grid(), D));
  if (cfg.task == Task::ForecastReconstruct) p.add(kMaskToken, gaussian(rng, 1, D, 0.02));
  if (cfg.arch == Arch::WithoutLVM) {
    p.add(kMixerWeight, xavier(rng, D, D));
    p.add(kMixerBias, Matrix::Zero(1, D));
  } else {
    p.add(kQuery, xavier(rng, D, D));
    p.add(kKey, xavier(rng, D, D));
    p.add(kValue, xavier(rng, D, D));
    p.add(kAttnOutWeight, xavier(rng, D, D));
    p.add(kAttnOutBias, Matrix::Zero(1, D));
    p.add(kAttnNormScale, Matrix::Ones(1, D));
    p.add(kAttnNormShift, Matrix::Zero(1, D));
  }
  if (cfg.arch == Arch::MiniMAE) {
    const int H = cfg.mlp_hidden();
    p.add(kFc1Weight, xavier(rng, D, H));
    p.add(kFc1Bias, Matrix::Zero(1, H));
    p.add(kFc2Weight, xavier(rng, H, D));
    p.add(kFc2Bias, Matrix::Zero(1, D));
    p.add(kMlpNormScale, Matrix::Ones(1, D));
    p.add(kMlpNormShift, Matrix::Zero(1, D));
  }
  p.add(kHeadWeight, xavier(rng, head_inputs(cfg), head_outputs(cfg)));
  p.add(kHeadBias, Matrix::Zero(1, head_outputs(cfg)));
  return p;
}

std::size_t parameter_count(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t D = cfg.embed_dim;
  std::size_t n = cfg.patch_dim() * D + D + cfg.num_patches() * D;
  if (cfg.task == Task::ForecastReconstruct) n += D;
  if (cfg.arch == Arch::WithoutLVM) {
    n += D * D + D;
  } else {
    n += 4 * D * D + D + 2 * D;
  }
  if (cfg.arch == Arch::MiniMAE) {
    const std::size_t H = cfg.mlp_hidden();
    n += D * H + H + H * D + D + 2 * D;
  }
  n += static_cast<std::size_t>(head_inputs(cfg)) * head_outputs(cfg) + head_outputs(cfg);
  return n;
}

Matrix forward_embed(const PatchSequence& seq, const ParamSet& params, const std::vector<bool>& masked) {
  const Matrix& W = params.at(kEmbedWeight);
  if (seq.patch_dim() != W.rows() || seq.count() != params.at(kPosition).rows()) {
    fail(ErrorCode::ShapeMismatch, "patch sequence does not match the projection shapes");
  }
  if (!masked.empty() && static_cast<int>(masked.size()) != seq.count()) {
    fail(ErrorCode::ShapeMismatch, "mask length differs from patch count");
  }
  return embed(seq.patches, params, masked);
}

AttentionOutput forward_attention(const Matrix& tokens, const ParamSet& params, int num_heads) {
  require(num_heads >= 1 && tokens.cols() % num_heads == 0, ErrorCode::InvalidArgument,
          "embedding width must be divisible by num_heads");
  AttentionTrace tr;
  AttentionOutput out;
  out.output = attention_layer(tokens, params, num_heads, tr);
  out.weights = std::move(tr.weights);
  return out;
}

Matrix forward_encoder(const PatchSequence& seq, const ParamSet& params, const ModelConfig& config,
                       const std::vector<bool>& masked) {
  EncoderTrace tr;
  run_encoder(seq, params, config, masked, tr);
  return tr.output;
}

Vector forward_classify(const std::vector<Matrix>& tokens_per_variate, const ParamSet& params) {
  require(!tokens_per_variate.empty(), ErrorCode::ShapeMismatch, "no variate tokens");
  const auto D = tokens_per_variate.front().cols();
  const auto N = tokens_per_variate.front().rows();
  const Matrix& W = params.at(kHeadWeight);
  if (W.rows() != static_cast<Eigen::Index>(tokens_per_variate.size()) * D) {
    fail(ErrorCode::ShapeMismatch, "classification head expects " + std::to_string(W.rows() / std::max<Eigen::Index>(D, 1)) +
                                       " variates");
  }
  Eigen::RowVectorXd features(W.rows());
  for (std::size_t v = 0; v < tokens_per_variate.size(); ++v) {
    const Matrix& t = tokens_per_variate[v];
    if (t.cols() != D || t.rows() != N) fail(ErrorCode::ShapeMismatch, "variates disagree on token shape");
    features.segment(static_cast<Eigen::Index>(v) * D, D) = t.colwise().mean();
  }
  return (features * W + params.at(kHeadBias)).transpose();
}

int argmax_class(const Vector& logits) {
  require(logits.size() >= 1, ErrorCode::EmptyInput, "empty logits");
  int best = 0;
  for (int c = 1; c < logits.size(); ++c) {
    if (logits(c) > logits(best)) best = c;
  }
  return best;
}

Vector forward_forecast_linear(const Matrix& tokens, const ParamSet& params, int horizon) {
  const Matrix& W = params.at(kHeadWeight);
  if (W.rows() != tokens.size() || W.cols() != horizon) {
    fail(ErrorCode::ShapeMismatch, "forecast head is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) +
                                       ", tokens give " + std::to_string(tokens.size()) + " features for horizon " +
                                       std::to_string(horizon));
  }
  return (flatten_tokens(tokens) * W + params.at(kHeadBias)).transpose();
}

PatchSequence forward_reconstruct(const PatchSequence& seq, const ForecastMask& mask, const ParamSet& params,
                                  const ModelConfig& config) {
  if (mask.grid_rows * mask.grid_cols != seq.count()) {
    fail(ErrorCode::ShapeMismatch, "mask grid differs from patch grid");
  }
  PatchSequence out = seq;
  if (mask.masked_patch_indices.empty()) return out;
  const Matrix tokens = forward_encoder(seq, params, config, mask.flags());
  const Matrix& W = params.at(kHeadWeight);
  if (W.rows() != tokens.cols() || W.cols() != seq.patch_dim()) {
    fail(ErrorCode::ShapeMismatch, "decoder shape does not match the patch size");
  }
  for (int idx : mask.masked_patch_indices) {
    out.patches.row(idx) = tokens.row(idx) * W + params.at(kHeadBias);
  }
  return out;
}

LossKind loss_kind_for(Task task) {
  switch (task) {
    case Task::Classify: return LossKind::CrossEntropy;
    case Task::ForecastLinear: return LossKind::Mse;
    case Task::ForecastReconstruct: return LossKind::MaskedMse;
  }
  return LossKind::Mse;
}

LossAndGrad backward(LossKind kind, std::span<const Example> batch, const ParamSet& params,
                     const ModelConfig& config) {
  require(!batch.empty(), ErrorCode::EmptyInput, "empty batch");
  LossAndGrad out;
  out.grads = params.zeros_like();
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const Example& ex : batch) out.loss += example_loss(kind, ex, params, config, &out.grads, weight);
  out.loss *= weight;
  if (!std::isfinite(out.loss)) fail(ErrorCode::NonFiniteLoss, "loss is not finite");
  return out;
}

double compute_loss(LossKind kind, std::span<const Example> batch, const ParamSet& params,
                    const ModelConfig& config) {
  require(!batch.empty(), ErrorCode::EmptyInput, "empty batch");
  double loss = 0.0;
  for (const Example& ex : batch) loss += example_loss(kind, ex, params, config, nullptr, 1.0);
  loss /= static_cast<double>(batch.size());
  if (!std::isfinite(loss)) fail(ErrorCode::NonFiniteLoss, "loss is not finite");
  return loss;
}

}  // namespace tsimg
