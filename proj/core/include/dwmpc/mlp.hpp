#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dwmpc/errors.hpp"
#include "dwmpc/rng.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Dense multilayer perceptron with tanh hidden activations and identity
/// output, used as the learned force residual. Parameters are plain doubles;
/// the class carries its own reverse-mode machinery so training stays
/// dependency-free and deterministic.
class Mlp {
 public:
  Mlp() = default;

  /// Zero-initialized network with the given layer sizes (>= 2 entries).
  explicit Mlp(std::vector<int> layer_sizes);

  /// Uniform(-s, s) initialization with s = 1/sqrt(fan_in) per layer.
  static Mlp random_init(std::vector<int> layer_sizes, Rng& rng);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  VecX forward(const VecX& input) const;

  /// Intermediate activations of one forward pass, needed for the reverse pass.
  struct Tape {
    std::vector<VecX> activations;  // activations[0] = input, last = output
  };
  VecX forward(const VecX& input, Tape& tape) const;

  /// Reverse pass: given dL/d(output), accumulates parameter gradients into
  /// `grad` (same architecture, += semantics) and returns dL/d(input).
  VecX backward(const Tape& tape, const VecX& output_grad, Mlp& grad) const;

  // Parameter access as one flat vector (weights row-major, then biases,
  // layer by layer). Used by the optimizer and the gradient checks.
  std::size_t parameter_count() const;
  VecX flatten() const;
  void set_from_flat(const VecX& flat);

  void add_scaled(const Mlp& other, double scale);  // this += scale * other
  void scale(double factor);
  void set_zero();
  double squared_norm() const;

  bool finite() const;

  /// Versioned plain-text weight file. Values are written with 17 significant
  /// digits so a save/load round trip is bit-exact.
  void save(const std::filesystem::path& path) const;
  static Mlp load(const std::filesystem::path& path);

  const std::vector<MatX>& weights() const { return weights_; }
  const std::vector<VecX>& biases() const { return biases_; }
  MatX& weight(int layer) { return weights_.at(layer); }
  VecX& bias(int layer) { return biases_.at(layer); }

 private:
  std::vector<int> sizes_;
  std::vector<MatX> weights_;  // weights_[l]: sizes_[l+1] x sizes_[l]
  std::vector<VecX> biases_;   // biases_[l]: sizes_[l+1]
};

}  // namespace dwmpc
