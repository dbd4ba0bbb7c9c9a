#pragma once

#include "commentcast/digest.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/engine.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>

namespace commentcast::providers {

/// On-disk response store: `<root>/<capability>/<key>.json`, or `.wav` for Tts.
///
/// Writes go to a unique temporary file in the same directory and are renamed
/// into place, so concurrent writers never expose a partial entry.
class ProviderCache {
 public:
  explicit ProviderCache(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  static std::string key(const std::string& fingerprint, const ProviderRequest& request) {
    return digest::sha256_hex(fingerprint + "\n" + request.request_hash);
  }

  std::filesystem::path entry_path(Capability capability, const std::string& key) const {
    return root_ / std::string(wire_name(capability)) / (key + (capability == Capability::Tts ? ".wav" : ".json"));
  }

  std::optional<std::string> load(Capability capability, const std::string& key) const {
    const auto path = entry_path(capability, key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void store(Capability capability, const std::string& key, const std::string& bytes) const {
    const auto path = entry_path(capability, key);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create cache directory " + path.parent_path().string());
    const auto tmp = path.parent_path() / (key + ".tmp-" + unique_suffix());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::Io, "cannot write cache entry " + tmp.string());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::Io, "cannot publish cache entry " + path.string());
    }
  }

 private:
  static std::string unique_suffix() {
    static std::atomic<std::uint64_t> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    return std::to_string(tid) + "-" + std::to_string(counter.fetch_add(1));
  }

  std::filesystem::path root_;
};

/// Engine decorator that consults a ProviderCache before the wrapped engine.
/// A miss stores the serialized response and then returns the stored bytes
/// re-parsed, so first and later calls see identical values.
class CachedEngine final : public Engine {
 public:
  CachedEngine(const Engine& inner, ProviderCache cache) : inner_(inner), cache_(std::move(cache)) {}

  std::string fingerprint() const override { return inner_.fingerprint(); }

  nlohmann::json invoke(const ProviderRequest& request) const override {
    const auto key = ProviderCache::key(inner_.fingerprint(), request);
    if (auto hit = cache_.load(request.capability, key)) {
      try {
        auto value = nlohmann::json::parse(*hit);
        ++hits_;
        return value;
      } catch (const nlohmann::json::parse_error&) {
        // Corrupt entry: fall through and overwrite it.
      }
    }
    ++misses_;
    const auto bytes = inner_.invoke(request).dump();
    cache_.store(request.capability, key, bytes);
    return nlohmann::json::parse(bytes);
  }

  PcmAudio synthesize(const ProviderRequest& request) const override {
    const auto key = ProviderCache::key(inner_.fingerprint(), request);
    if (auto hit = cache_.load(request.capability, key)) {
      try {
        auto audio = wav::decode(std::span(reinterpret_cast<const std::uint8_t*>(hit->data()), hit->size()));
        ++hits_;
        return audio;
      } catch (const Error&) {
      }
    }
    ++misses_;
    const auto encoded = wav::encode(inner_.synthesize(request));
    cache_.store(request.capability, key, std::string(encoded.begin(), encoded.end()));
    return wav::decode(encoded);
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  const ProviderCache& cache() const { return cache_; }

 private:
  const Engine& inner_;
  ProviderCache cache_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace commentcast::providers
