#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurolabel/image.hpp"
#include "neurolabel/neuron.hpp"
#include "neurolabel/retry.hpp"
#include "neurolabel/scoring.hpp"

namespace nlab {

/// Raw output of one layer for one image: shape {D} for natively 1-D layers
/// or {C, H, W} for convolutional maps, row-major.
struct LayerTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Global spatial mean per channel for {C, H, W}; identity for {D}. Throws
/// Error{layer_shape} if the tensor does not match `declared_width` or its
/// data length disagrees with its shape.
std::vector<double> pool(const LayerTensor& raw, std::size_t declared_width);

class VisionProvider {
 public:
  virtual ~VisionProvider() = default;
  /// Pooled activations, |images| rows by |indices| columns. Unknown layers
  /// raise Error{configuration}.
  virtual std::vector<std::vector<double>> activations(std::span<const Image> images,
                                                       const std::string& layer,
                                                       std::span<const std::size_t> indices) = 0;
};

/// One activation per image, in batch order.
ActivationSet extract(VisionProvider& provider, std::span<const Image> images, const NeuronAddress& neuron,
                      const RetryPolicy& retry = {}, const Sleeper& sleeper = sleep_for);

/// Labelled natural images. classes() and images() are in canonical order
/// (sorted identifiers) so selection is reproducible.
class LabeledImageSource {
 public:
  virtual ~LabeledImageSource() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> classes() const = 0;
  virtual std::vector<Image> images(const std::string& class_label, std::size_t limit) const = 0;
};

/// <root>/<class>/<image files>. Class names are directory names with
/// underscores read as spaces.
class DirectoryDataset final : public LabeledImageSource {
 public:
  explicit DirectoryDataset(std::filesystem::path root);
  std::string id() const override;
  std::vector<std::string> classes() const override;
  std::vector<Image> images(const std::string& class_label, std::size_t limit) const override;

 private:
  std::filesystem::path root_;
};

/// Per-class, per-image activations of one neuron: rows x cols, row-major.
struct InitMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::string> class_labels;

  double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
  /// Throws std::invalid_argument when sizes disagree or values are not finite.
  void validate() const;

  friend bool operator==(const InitMatrix&, const InitMatrix&) = default;
};

/// First K classes and first M images per class in canonical order. Throws
/// Error{insufficient_data} naming the first short class.
InitMatrix build_init_matrix(VisionProvider& provider, const LabeledImageSource& dataset,
                             const NeuronAddress& neuron, std::size_t classes, std::size_t images_per_class,
                             const RetryPolicy& retry = {});

/// Same as build_init_matrix for several neurons of one layer, sharing each
/// class's forward pass.
std::vector<InitMatrix> build_init_matrices(VisionProvider& provider, const LabeledImageSource& dataset,
                                            const std::string& layer, std::span<const std::size_t> indices,
                                            std::size_t classes, std::size_t images_per_class,
                                            const RetryPolicy& retry = {});

/// Binary cache: "LINEAIM1", K and M as u32 LE, K*M f64 LE row-major, then
/// K labels each as u32 LE byte length followed by UTF-8 bytes.
std::string encode_init_matrix(const InitMatrix& matrix);
/// Throws Error{io} on a bad magic or truncated payload.
InitMatrix decode_init_matrix(std::string_view bytes);
void write_init_matrix(const std::filesystem::path& path, const InitMatrix& matrix);
InitMatrix read_init_matrix(const std::filesystem::path& path);

/// <cache_dir>/<model>__<layer>__<dataset>/neuron_<index>.aim
std::filesystem::path init_cache_path(const std::filesystem::path& cache_dir, std::string_view model_id,
                                      const NeuronAddress& neuron, std::string_view dataset_id);

}  // namespace nlab
