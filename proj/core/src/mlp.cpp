#include "dwmpc/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dwmpc {

namespace {

constexpr const char* kMagic = "knode-mlp";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw DimensionError("mlp: need at least input and output layers");
  for (int s : sizes_)
    if (s <= 0) throw DimensionError("mlp: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.emplace_back(MatX::Zero(sizes_[l + 1], sizes_[l]));
    biases_.emplace_back(VecX::Zero(sizes_[l + 1]));
  }
}

Mlp Mlp::random_init(std::vector<int> layer_sizes, Rng& rng) {
  Mlp mlp(std::move(layer_sizes));
  for (std::size_t l = 0; l < mlp.weights_.size(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(mlp.sizes_[l]));
    for (Eigen::Index i = 0; i < mlp.weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < mlp.weights_[l].cols(); ++j)
        mlp.weights_[l](i, j) = s * (2.0 * rng.uniform01() - 1.0);
  }
  return mlp;
}

VecX Mlp::forward(const VecX& input) const {
  if (input.size() != sizes_.front())
    throw DimensionError("mlp forward: input size mismatch");
  VecX h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = (weights_[l] * h + biases_[l]).eval();
    if (l + 1 < weights_.size()) h = h.array().tanh().matrix();
  }
  return h;
}

VecX Mlp::forward(const VecX& input, Tape& tape) const {
  if (input.size() != sizes_.front())
    throw DimensionError("mlp forward: input size mismatch");
  tape.activations.clear();
  tape.activations.push_back(input);
  VecX h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = (weights_[l] * h + biases_[l]).eval();
    if (l + 1 < weights_.size()) h = h.array().tanh().matrix();
    tape.activations.push_back(h);
  }
  return h;
}

VecX Mlp::backward(const Tape& tape, const VecX& output_grad, Mlp& grad) const {
  if (grad.sizes_ != sizes_) throw DimensionError("mlp backward: gradient architecture mismatch");
  if (tape.activations.size() != weights_.size() + 1)
    throw DimensionError("mlp backward: tape does not match architecture");

  VecX delta = output_grad;
  for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
    // Hidden activations were stored post-tanh: dtanh = 1 - act^2.
    if (l + 1 < static_cast<int>(weights_.size())) {
      const VecX& act = tape.activations[l + 1];
      delta = (delta.array() * (1.0 - act.array().square())).matrix();
    }
    grad.weights_[l] += delta * tape.activations[l].transpose();
    grad.biases_[l] += delta;
    delta = (weights_[l].transpose() * delta).eval();
  }
  return delta;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return n;
}

VecX Mlp::flatten() const {
  VecX flat(parameter_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) flat(at++) = weights_[l](i, j);
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) flat(at++) = biases_[l](i);
  }
  return flat;
}

void Mlp::set_from_flat(const VecX& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw DimensionError("mlp set_from_flat: size mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) weights_[l](i, j) = flat(at++);
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = flat(at++);
  }
}

void Mlp::add_scaled(const Mlp& other, double scale) {
  if (other.sizes_ != sizes_) throw DimensionError("mlp add_scaled: architecture mismatch");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] += scale * other.weights_[l];
    biases_[l] += scale * other.biases_[l];
  }
}

void Mlp::scale(double factor) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] *= factor;
    biases_[l] *= factor;
  }
}

void Mlp::set_zero() {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].setZero();
    biases_[l].setZero();
  }
}

double Mlp::squared_norm() const {
  double n = 0.0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += weights_[l].squaredNorm() + biases_[l].squaredNorm();
  return n;
}

bool Mlp::finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l)
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  return true;
}

void Mlp::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("mlp save: cannot open " + path.string());
  out << kMagic << " " << kFormatVersion << "\n";
  out << "layers";
  for (int s : sizes_) out << " " << s;
  out << "\nactivation tanh\n";
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out << "weight " << l << "\n";
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) {
        if (j) out << " ";
        out << format_double(weights_[l](i, j));
      }
      out << "\n";
    }
    out << "bias " << l << "\n";
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      if (i) out << " ";
      out << format_double(biases_[l](i));
    }
    out << "\n";
  }
  if (!out) throw ParseError("mlp save: write failed for " + path.string());
}

namespace {

struct LineReader {
  std::ifstream in;
  std::string path;
  int line_number = 0;

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_number;
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("mlp load: " + path + ":" + std::to_string(line_number) + ": " + what);
  }
};

std::vector<double> parse_row(LineReader& reader, const std::string& line, int expected) {
  std::istringstream ss(line);
  std::vector<double> row;
  double v;
  while (ss >> v) row.push_back(v);
  if (!ss.eof()) reader.fail("malformed float value");
  if (static_cast<int>(row.size()) != expected)
    reader.fail("expected " + std::to_string(expected) + " values, got " +
                std::to_string(row.size()));
  return row;
}

}  // namespace

Mlp Mlp::load(const std::filesystem::path& path) {
  LineReader reader{std::ifstream(path), path.string()};
  if (!reader.in) throw ParseError("mlp load: cannot open " + path.string());

  std::string line;
  if (!reader.next(line)) reader.fail("missing header line");
  {
    std::istringstream ss(line);
    std::string magic;
    int version = -1;
    ss >> magic >> version;
    if (magic != kMagic) reader.fail("bad magic, expected '" + std::string(kMagic) + "'");
    if (version != kFormatVersion)
      reader.fail("unsupported format version " + std::to_string(version));
  }

  if (!reader.next(line)) reader.fail("missing 'layers' line");
  std::vector<int> sizes;
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "layers") reader.fail("expected 'layers'");
    int s;
    while (ss >> s) sizes.push_back(s);
    if (sizes.size() < 2) reader.fail("need at least two layer sizes");
  }

  if (!reader.next(line)) reader.fail("missing 'activation' line");
  {
    std::istringstream ss(line);
    std::string tag, act;
    ss >> tag >> act;
    if (tag != "activation" || act != "tanh") reader.fail("expected 'activation tanh'");
  }

  Mlp mlp(sizes);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (!reader.next(line)) reader.fail("truncated file, expected 'weight' section");
    {
      std::istringstream ss(line);
      std::string tag;
      std::size_t idx;
      ss >> tag >> idx;
      if (tag != "weight" || idx != l)
        reader.fail("expected 'weight " + std::to_string(l) + "'");
    }
    for (int i = 0; i < sizes[l + 1]; ++i) {
      if (!reader.next(line)) reader.fail("truncated file inside weight matrix");
      const auto row = parse_row(reader, line, sizes[l]);
      for (int j = 0; j < sizes[l]; ++j) mlp.weights_[l](i, j) = row[j];
    }
    if (!reader.next(line)) reader.fail("truncated file, expected 'bias' section");
    {
      std::istringstream ss(line);
      std::string tag;
      std::size_t idx;
      ss >> tag >> idx;
      if (tag != "bias" || idx != l) reader.fail("expected 'bias " + std::to_string(l) + "'");
    }
    if (!reader.next(line)) reader.fail("truncated file inside bias vector");
    const auto row = parse_row(reader, line, sizes[l + 1]);
    for (int i = 0; i < sizes[l + 1]; ++i) mlp.biases_[l](i) = row[i];
  }
  return mlp;
}

}  // namespace dwmpc
