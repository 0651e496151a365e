#include "neurolabel/activation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>

#include "neurolabel/error.hpp"
#include "neurolabel/io.hpp"

namespace nlab {

namespace {

constexpr char kInitMagic[8] = {'L', 'I', 'N', 'E', 'A', 'I', 'M', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(Errc::io, "init matrix cache is truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t uint(int width) {
    const auto raw = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string sanitize(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return out;
}

std::string class_from_dir(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

std::vector<double> pool(const LayerTensor& raw, std::size_t declared_width) {
  std::size_t expected = 1;
  for (auto d : raw.shape) expected *= d;
  if (raw.shape.empty() || expected != raw.data.size()) {
    throw Error(Errc::layer_shape, fmt::format("tensor data length {} does not match its shape", raw.data.size()));
  }
  if (raw.shape[0] != declared_width) {
    throw Error(Errc::layer_shape,
                fmt::format("layer has {} channels, expected {}", raw.shape[0], declared_width));
  }
  if (raw.shape.size() == 1) return raw.data;
  if (raw.shape.size() != 3) {
    throw Error(Errc::layer_shape, fmt::format("unsupported tensor rank {}", raw.shape.size()));
  }
  const std::size_t spatial = raw.shape[1] * raw.shape[2];
  if (spatial == 0) throw Error(Errc::layer_shape, "empty spatial map");
  std::vector<double> out(declared_width);
  for (std::size_t c = 0; c < declared_width; ++c) {
    double sum = 0.0;
    for (std::size_t k = 0; k < spatial; ++k) sum += raw.data[c * spatial + k];
    out[c] = sum / static_cast<double>(spatial);
  }
  return out;
}

ActivationSet extract(VisionProvider& provider, std::span<const Image> images, const NeuronAddress& neuron,
                      const RetryPolicy& retry, const Sleeper& sleeper) {
  if (images.empty()) throw Error(Errc::empty_activation, "cannot extract activations from an empty batch");
  const std::size_t index[] = {neuron.index};
  auto matrix = with_retry(retry, [&] { return provider.activations(images, neuron.layer, index); }, sleeper);
  if (matrix.size() != images.size()) {
    throw Error(Errc::protocol,
                fmt::format("provider returned {} activation rows for {} images", matrix.size(), images.size()));
  }
  std::vector<double> values;
  values.reserve(matrix.size());
  for (const auto& row : matrix) {
    if (row.size() != 1) throw Error(Errc::protocol, "provider returned the wrong number of activation columns");
    values.push_back(row[0]);
  }
  return ActivationSet(std::move(values));
}

DirectoryDataset::DirectoryDataset(std::filesystem::path root) : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) {
    throw Error(Errc::configuration, fmt::format("dataset directory '{}' does not exist", root_.string()));
  }
}

std::string DirectoryDataset::id() const { return root_.filename().string(); }

std::vector<std::string> DirectoryDataset::classes() const {
  std::vector<std::string> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory()) dirs.push_back(entry.path().filename().string());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<std::string> out;
  for (const auto& d : dirs) out.push_back(class_from_dir(d));
  return out;
}

std::vector<Image> DirectoryDataset::images(const std::string& class_label, std::size_t limit) const {
  std::string dir = class_label;
  std::replace(dir.begin(), dir.end(), ' ', '_');
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root_ / dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() > limit) files.resize(limit);
  std::vector<Image> out;
  for (const auto& f : files) {
    const auto payload = read_file(f);
    Image image;
    image.id = fmt::format("{}/{}", dir, f.filename().string());
    image.bytes.assign(payload.begin(), payload.end());
    image.media_type = detect_image_media_type(image.bytes);
    if (image.media_type.empty()) {
      throw Error(Errc::protocol, fmt::format("'{}' is not a PNG/JPEG/WebP image", f.string()));
    }
    out.push_back(std::move(image));
  }
  return out;
}

void InitMatrix::validate() const {
  if (values.size() != rows * cols || class_labels.size() != rows) {
    throw std::invalid_argument("init matrix dimensions are inconsistent");
  }
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("init matrix contains non-finite values");
  }
}

std::vector<InitMatrix> build_init_matrices(VisionProvider& provider, const LabeledImageSource& dataset,
                                            const std::string& layer, std::span<const std::size_t> indices,
                                            std::size_t classes, std::size_t images_per_class,
                                            const RetryPolicy& retry) {
  if (classes == 0 || images_per_class == 0) {
    throw Error(Errc::configuration, "init matrix needs K >= 1 and M >= 1");
  }
  auto labels = dataset.classes();
  if (labels.size() < classes) {
    throw Error(Errc::insufficient_data,
                fmt::format("dataset '{}' has {} classes, need {}", dataset.id(), labels.size(), classes));
  }
  labels.resize(classes);

  std::vector<InitMatrix> out(indices.size());
  for (auto& m : out) {
    m.rows = classes;
    m.cols = images_per_class;
    m.values.resize(classes * images_per_class);
    m.class_labels = labels;
  }
  for (std::size_t k = 0; k < classes; ++k) {
    const auto images = dataset.images(labels[k], images_per_class);
    if (images.size() < images_per_class) {
      throw Error(Errc::insufficient_data, fmt::format("class '{}' has {} images, need {}", labels[k],
                                                       images.size(), images_per_class));
    }
    const auto rows = with_retry(retry, [&] { return provider.activations(images, layer, indices); });
    if (rows.size() != images_per_class) {
      throw Error(Errc::protocol, "provider returned the wrong number of activation rows");
    }
    for (std::size_t m = 0; m < images_per_class; ++m) {
      if (rows[m].size() != indices.size()) {
        throw Error(Errc::protocol, "provider returned the wrong number of activation columns");
      }
      for (std::size_t n = 0; n < indices.size(); ++n) {
        if (!std::isfinite(rows[m][n])) {
          throw Error(Errc::non_finite_activation, fmt::format("non-finite activation for class '{}'", labels[k]));
        }
        out[n].values[k * images_per_class + m] = rows[m][n];
      }
    }
  }
  return out;
}

InitMatrix build_init_matrix(VisionProvider& provider, const LabeledImageSource& dataset,
                             const NeuronAddress& neuron, std::size_t classes, std::size_t images_per_class,
                             const RetryPolicy& retry) {
  const std::size_t index[] = {neuron.index};
  return std::move(build_init_matrices(provider, dataset, neuron.layer, index, classes, images_per_class, retry)[0]);
}

std::string encode_init_matrix(const InitMatrix& matrix) {
  matrix.validate();
  std::string out(kInitMagic, sizeof kInitMagic);
  put_u32(out, static_cast<std::uint32_t>(matrix.rows));
  put_u32(out, static_cast<std::uint32_t>(matrix.cols));
  for (double v : matrix.values) put_f64(out, v);
  for (const auto& label : matrix.class_labels) {
    put_u32(out, static_cast<std::uint32_t>(label.size()));
    out += label;
  }
  return out;
}

InitMatrix decode_init_matrix(std::string_view bytes) {
  Reader in(bytes);
  if (std::memcmp(in.take(sizeof kInitMagic).data(), kInitMagic, sizeof kInitMagic) != 0) {
    throw Error(Errc::io, "init matrix cache has a bad magic");
  }
  InitMatrix m;
  m.rows = in.uint(4);
  m.cols = in.uint(4);
  m.values.resize(m.rows * m.cols);
  for (auto& v : m.values) v = std::bit_cast<double>(in.uint(8));
  for (std::size_t k = 0; k < m.rows; ++k) {
    const auto len = in.uint(4);
    m.class_labels.emplace_back(in.take(len));
  }
  if (!in.done()) throw Error(Errc::io, "init matrix cache has trailing bytes");
  try {
    m.validate();
  } catch (const std::invalid_argument& ex) {
    throw Error(Errc::io, ex.what());
  }
  return m;
}

void write_init_matrix(const std::filesystem::path& path, const InitMatrix& matrix) {
  write_file_atomic(path, encode_init_matrix(matrix));
}

InitMatrix read_init_matrix(const std::filesystem::path& path) { return decode_init_matrix(read_file(path)); }

std::filesystem::path init_cache_path(const std::filesystem::path& cache_dir, std::string_view model_id,
                                      const NeuronAddress& neuron, std::string_view dataset_id) {
  return cache_dir / fmt::format("{}__{}__{}", sanitize(model_id), sanitize(neuron.layer), sanitize(dataset_id)) /
         fmt::format("neuron_{}.aim", neuron.index);
}

}  // namespace nlab
