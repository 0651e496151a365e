#include "neurolabel/image_cache.hpp"

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/io.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

namespace {

Angle parse_angle(std::string_view text) {
  for (auto a : kAllAngles) {
    if (to_string(a) == text) return a;
  }
  throw Error(Errc::io, fmt::format("unknown angle '{}' in cache manifest", text));
}

Lighting parse_lighting(std::string_view text) {
  for (auto l : kAllLightings) {
    if (to_string(l) == text) return l;
  }
  throw Error(Errc::io, fmt::format("unknown lighting '{}' in cache manifest", text));
}

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

std::shared_ptr<ImageCache::Slot> ImageCache::slot(const Key& key) {
  std::lock_guard lock(mutex_);
  auto& s = slots_[key];
  if (!s) s = std::make_shared<Slot>();
  return s;
}

ImageCache::Lookup ImageCache::get_or_create(const ConceptLabel& concept_label, std::uint64_t run_salt,
                                             const std::function<ImageBatch()>& make) {
  const Key key{concept_label, run_salt};
  auto s = slot(key);
  std::lock_guard lock(s->mutex);
  if (s->batch) return {s->batch, true};
  if (auto loaded = load(key)) {
    s->batch = std::move(loaded);
    return {s->batch, true};
  }
  auto batch = std::make_shared<const ImageBatch>(make());
  store(key, *batch);
  s->batch = batch;
  return {std::move(batch), false};
}

std::shared_ptr<const ImageBatch> ImageCache::find(const ConceptLabel& concept_label, std::uint64_t run_salt) const {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(mutex_);
    auto it = slots_.find(Key{concept_label, run_salt});
    if (it == slots_.end()) return nullptr;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->batch;
}

std::size_t ImageCache::size() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, s] : slots_) {
    std::lock_guard slot_lock(s->mutex);
    n += s->batch ? 1 : 0;
  }
  return n;
}

std::shared_ptr<const ImageBatch> ImageCache::load(const Key& key) const {
  if (!dir_) return nullptr;
  const auto entry = *dir_ / to_hex(seed_for(key.first, key.second));
  const auto manifest_path = entry / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return nullptr;
  const auto doc = detail::read_json_file(manifest_path);
  try {
    if (doc.at("concept").get<std::string>() != key.first.text() ||
        doc.at("run_salt").get<std::uint64_t>() != key.second) {
      return nullptr;  // hash collision on the directory name
    }
    ImageBatch batch{key.first, {}, {}};
    for (const auto& p : doc.at("prompts")) {
      batch.prompts.push_back(make_prompt(key.first, parse_angle(p.at("angle").get<std::string>()),
                                          parse_lighting(p.at("lighting").get<std::string>()),
                                          p.at("seed").get<std::uint64_t>()));
    }
    for (const auto& im : doc.at("images")) {
      Image image;
      image.id = im.at("id").get<std::string>();
      image.media_type = im.at("media_type").get<std::string>();
      const auto payload = read_file(entry / im.at("file").get<std::string>());
      image.bytes.assign(payload.begin(), payload.end());
      if (image.media_type == kEmbeddingMediaType) {
        image.embedding = decode_embedding(image.bytes);
        image.bytes.clear();
      }
      batch.images.push_back(std::move(image));
    }
    if (batch.images.size() != batch.prompts.size()) {
      throw Error(Errc::io, fmt::format("cache entry '{}' has mismatched image/prompt counts", entry.string()));
    }
    return std::make_shared<const ImageBatch>(std::move(batch));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::io, fmt::format("malformed cache manifest '{}': {}", manifest_path.string(), ex.what()));
  }
}

void ImageCache::store(const Key& key, const ImageBatch& batch) const {
  if (!dir_) return;
  const auto entry = *dir_ / to_hex(seed_for(key.first, key.second));
  nlohmann::json doc;
  doc["concept"] = key.first.text();
  doc["run_salt"] = key.second;
  doc["prompts"] = nlohmann::json::array();
  for (const auto& p : batch.prompts) {
    doc["prompts"].push_back({{"text", p.rendered},
                              {"angle", std::string(to_string(p.angle))},
                              {"lighting", std::string(to_string(p.lighting))},
                              {"seed", p.seed}});
  }
  doc["images"] = nlohmann::json::array();
  for (std::size_t i = 0; i < batch.images.size(); ++i) {
    const auto& image = batch.images[i];
    const auto file = fmt::format("image_{}.bin", i);
    const bool is_embedding = image.bytes.empty() && !image.embedding.empty();
    write_file_atomic(entry / file, as_string(is_embedding ? encode_embedding(image.embedding) : image.bytes));
    doc["images"].push_back({{"id", image.id},
                             {"media_type", is_embedding ? std::string(kEmbeddingMediaType) : image.media_type},
                             {"file", file}});
  }
  // Manifest last: its presence marks the entry complete.
  write_file_atomic(entry / "manifest.json", doc.dump(2) + "\n");
}

}  // namespace nlab
