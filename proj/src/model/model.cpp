#include "dicnet/model/model.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"

#include <json.hpp>

#include <cmath>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "model";

std::string layer_name(const std::string& net, std::size_t view, std::size_t layer,
                       const char* part) {
  return net + "." + std::to_string(view) + "." + std::to_string(layer) + "." + part;
}

// Layer widths of view v's encoder, input first.
std::vector<std::size_t> encoder_widths(const ModelConfig& c, std::size_t v) {
  std::vector<std::size_t> widths{c.view_dims[v]};
  widths.insert(widths.end(), c.hidden_widths.begin(), c.hidden_widths.end());
  widths.push_back(c.repr_dim);
  return widths;
}

std::vector<std::size_t> decoder_widths(const ModelConfig& c, std::size_t v) {
  std::vector<std::size_t> widths = encoder_widths(c, v);
  return {widths.rbegin(), widths.rend()};
}

Matrix init_weight(Rng& rng, InitScheme scheme, std::size_t fan_in, std::size_t fan_out,
                   bool feeds_relu) {
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  if (scheme == InitScheme::kZeros) return w;
  const double bound = std::sqrt((feeds_relu ? 6.0 : 3.0) / static_cast<double>(fan_in));
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-bound, bound);
  return w;
}

void add_mlp(ParamStore& params, Rng& rng, InitScheme scheme, const std::string& net,
             std::size_t view, const std::vector<std::size_t>& widths) {
  const std::size_t layers = widths.size() - 1;
  for (std::size_t k = 0; k < layers; ++k) {
    params.add(layer_name(net, view, k, "weight"),
               init_weight(rng, scheme, widths[k], widths[k + 1], k + 1 < layers));
    params.add(layer_name(net, view, k, "bias"),
               Matrix::Zero(1, static_cast<Eigen::Index>(widths[k + 1])));
  }
}

}  // namespace

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::kZeros ? "zeros" : "kaiming_uniform";
}

InitScheme init_scheme_from_string(const std::string& name) {
  if (name == "kaiming_uniform") return InitScheme::kKaimingUniform;
  if (name == "zeros") return InitScheme::kZeros;
  throw ValidationError(kModule, "unknown init scheme '" + name + "'");
}

void ModelConfig::validate() const {
  if (view_dims.empty()) throw ValidationError(kModule, "model needs at least one view");
  for (std::size_t m : view_dims) {
    if (m < 1) throw ValidationError(kModule, "view dims must be >= 1");
  }
  for (std::size_t h : hidden_widths) {
    if (h < 1) throw ValidationError(kModule, "hidden widths must be >= 1");
  }
  if (repr_dim < 1) throw ValidationError(kModule, "representation dim d must be >= 1");
  if (num_labels < 1) throw ValidationError(kModule, "label count c must be >= 1");
}

std::string ModelConfig::to_json() const {
  nlohmann::json j = {{"view_dims", view_dims},   {"hidden_widths", hidden_widths},
                      {"repr_dim", repr_dim},     {"num_labels", num_labels},
                      {"init", to_string(init)},  {"seed", seed}};
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.view_dims = j.at("view_dims").get<std::vector<std::size_t>>();
    c.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
    c.repr_dim = j.at("repr_dim").get<std::size_t>();
    c.num_labels = j.at("num_labels").get<std::size_t>();
    c.init = init_scheme_from_string(j.at("init").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(kModule, std::string("malformed model config: ") + e.what());
  }
  c.validate();
  return c;
}

DICNetModel::DICNetModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);
  for (std::size_t v = 0; v < config_.num_views(); ++v) {
    add_mlp(params_, rng, config_.init, "encoder", v, encoder_widths(config_, v));
    add_mlp(params_, rng, config_.init, "decoder", v, decoder_widths(config_, v));
  }
  params_.add("classifier.weight",
              init_weight(rng, config_.init, config_.repr_dim, config_.num_labels, false));
  params_.add("classifier.bias", Matrix::Zero(1, static_cast<Eigen::Index>(config_.num_labels)));
}

DICNetModel::DICNetModel(ModelConfig config, ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const DICNetModel reference(config_);
  for (const auto& [name, value] : reference.params()) {
    if (!params_.contains(name)) {
      throw ValidationError(kModule, "parameter '" + name + "' missing");
    }
    if (shape_of(params_.at(name)) != shape_of(value)) {
      throw ShapeError(kModule, "parameter '" + name + "' has shape " +
                                    to_string(shape_of(params_.at(name))) + ", expected " +
                                    to_string(shape_of(value)));
    }
  }
  if (params_.size() != reference.params().size()) {
    throw ValidationError(kModule, "checkpoint has parameters this model does not use");
  }
}

void DICNetModel::save(const std::filesystem::path& path) const {
  save_checkpoint(path, {config_.to_json(), params_});
}

DICNetModel DICNetModel::load(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  return {ModelConfig::from_json(ckpt.header), std::move(ckpt.params)};
}

BoundModel::BoundModel(Graph& graph, const ModelConfig& config, const ParamStore& params)
    : graph_(&graph), config_(&config) {
  auto bind_mlp = [&](const std::string& net, std::size_t v, std::size_t layers) {
    std::vector<Layer> out;
    for (std::size_t k = 0; k < layers; ++k) {
      const std::string w = layer_name(net, v, k, "weight");
      const std::string b = layer_name(net, v, k, "bias");
      out.push_back({graph.parameter(w, params.at(w)), graph.parameter(b, params.at(b))});
    }
    return out;
  };
  const std::size_t layers = config.hidden_widths.size() + 1;
  for (std::size_t v = 0; v < config.num_views(); ++v) {
    encoders_.push_back(bind_mlp("encoder", v, layers));
    decoders_.push_back(bind_mlp("decoder", v, layers));
  }
  classifier_ = {graph.parameter("classifier.weight", params.at("classifier.weight")),
                 graph.parameter("classifier.bias", params.at("classifier.bias"))};
}

Var BoundModel::run(const std::vector<Layer>& layers, Var x) const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    x = add_row(matmul(x, layers[k].weight), layers[k].bias);
    if (k + 1 < layers.size()) x = relu(x);
  }
  return x;
}

Var BoundModel::encode(std::size_t view, Var x) const {
  if (view >= encoders_.size()) {
    throw ValidationError(kModule, "view index " + std::to_string(view) + " out of range");
  }
  if (static_cast<std::size_t>(x.shape().cols) != config_->view_dims[view]) {
    throw ShapeError(kModule, "view " + std::to_string(view) + " input has shape " +
                                  to_string(x.shape()) + ", expected " +
                                  std::to_string(config_->view_dims[view]) + " columns");
  }
  return run(encoders_[view], x);
}

Var BoundModel::decode(std::size_t view, Var z) const {
  if (view >= decoders_.size()) {
    throw ValidationError(kModule, "view index " + std::to_string(view) + " out of range");
  }
  if (static_cast<std::size_t>(z.shape().cols) != config_->repr_dim) {
    throw ShapeError(kModule, "representation has shape " + to_string(z.shape()) +
                                  ", expected " + std::to_string(config_->repr_dim) + " columns");
  }
  return run(decoders_[view], z);
}

Var BoundModel::classify(Var h) const {
  if (static_cast<std::size_t>(h.shape().cols) != config_->repr_dim) {
    throw ShapeError(kModule, "fused representation has shape " + to_string(h.shape()) +
                                  ", expected " + std::to_string(config_->repr_dim) + " columns");
  }
  return sigmoid(add_row(matmul(h, classifier_.weight), classifier_.bias));
}

Var fuse(std::span<const Var> z, const Matrix& view_mask) {
  if (z.empty()) throw ValidationError(kModule, "fuse needs at least one view");
  if (view_mask.cols() != static_cast<Eigen::Index>(z.size())) {
    throw ShapeError(kModule, "view mask has " + std::to_string(view_mask.cols()) +
                                  " columns for " + std::to_string(z.size()) + " views");
  }
  const Shape s = z.front().shape();
  if (view_mask.rows() != s.rows) {
    throw ShapeError(kModule, "view mask has shape " + to_string(shape_of(view_mask)) +
                                  ", representations have " + std::to_string(s.rows) + " rows");
  }
  const Matrix counts = view_mask.rowwise().sum();
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    if (counts(i, 0) < 1.0) {
      throw ValidationError(kModule, "sample " + std::to_string(i) + " has no available view");
    }
  }
  Graph& g = z.front().graph();
  auto broadcast = [&](const Matrix& column) {
    return Matrix(column.replicate(1, s.cols));
  };
  Var total = z[0] * g.constant(broadcast(view_mask.col(0)));
  for (std::size_t v = 1; v < z.size(); ++v) {
    if (z[v].shape() != s) {
      throw ShapeError(kModule, "representation " + std::to_string(v) + " has shape " +
                                    to_string(z[v].shape()) + ", expected " + to_string(s));
    }
    total = total + z[v] * g.constant(broadcast(view_mask.col(static_cast<Eigen::Index>(v))));
  }
  return total / g.constant(broadcast(counts));
}

Matrix encode(const DICNetModel& model, std::size_t view, const Matrix& x) {
  Graph g;
  BoundModel bound(g, model.config(), model.params());
  return g.forward(bound.encode(view, g.constant(x)));
}

Matrix decode(const DICNetModel& model, std::size_t view, const Matrix& z) {
  Graph g;
  BoundModel bound(g, model.config(), model.params());
  return g.forward(bound.decode(view, g.constant(z)));
}

Matrix fuse(std::span<const Matrix> z, const Matrix& view_mask) {
  Graph g;
  std::vector<Var> vars;
  for (const Matrix& m : z) vars.push_back(g.constant(m));
  return g.forward(fuse(vars, view_mask));
}

Matrix classify(const DICNetModel& model, const Matrix& h) {
  Graph g;
  BoundModel bound(g, model.config(), model.params());
  return g.forward(bound.classify(g.constant(h)));
}

}  // namespace dicnet
