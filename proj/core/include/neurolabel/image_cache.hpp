#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "neurolabel/synthesis.hpp"

namespace nlab {

/// Concept-image cache keyed by (normalised label, run salt), shared across
/// the neurons of a run. The first caller for a key generates while later
/// callers for that key wait; other keys proceed independently.
///
/// With a directory configured, batches persist as content-addressed
/// entries: <dir>/<hex seed_for(label, salt)>/manifest.json plus one
/// image_<i>.bin payload per image.
class ImageCache {
 public:
  ImageCache() = default;
  explicit ImageCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  ImageCache(const ImageCache&) = delete;
  ImageCache& operator=(const ImageCache&) = delete;

  struct Lookup {
    std::shared_ptr<const ImageBatch> batch;
    bool hit = false;
  };

  /// Returns the cached batch or stores the result of `make()`. Exceptions
  /// from `make` propagate and leave the key empty.
  Lookup get_or_create(const ConceptLabel& concept_label, std::uint64_t run_salt,
                       const std::function<ImageBatch()>& make);

  std::shared_ptr<const ImageBatch> find(const ConceptLabel& concept_label, std::uint64_t run_salt) const;
  std::size_t size() const;

  const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

 private:
  struct Slot {
    std::mutex mutex;
    std::shared_ptr<const ImageBatch> batch;
  };
  using Key = std::pair<ConceptLabel, std::uint64_t>;

  std::shared_ptr<Slot> slot(const Key& key);
  std::shared_ptr<const ImageBatch> load(const Key& key) const;
  void store(const Key& key, const ImageBatch& batch) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<Slot>> slots_;
};

}  // namespace nlab
