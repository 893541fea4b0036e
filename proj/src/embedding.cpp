// Copyright 2026 The smisel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "smisel/embedding.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "embedding files are little-endian; big-endian hosts are "
              "not supported");

namespace smisel {

namespace {

std::vector<std::int64_t> iota_ids(std::size_t n) {
  std::vector<std::int64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int64_t>(i);
  return ids;
}

}  // namespace

EmbeddingSet::EmbeddingSet(Eigen::MatrixXd v)
    : vectors(std::move(v)),
      ids(iota_ids(static_cast<std::size_t>(vectors.rows()))) {}

EmbeddingSet::EmbeddingSet(Eigen::MatrixXd v, std::vector<std::int32_t> lab)
    : vectors(std::move(v)),
      labels(std::move(lab)),
      ids(iota_ids(static_cast<std::size_t>(vectors.rows()))) {
  if (labels->size() != size())
    throw std::invalid_argument("EmbeddingSet: labels size mismatch");
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
  EmbeddingSet out;
  out.vectors.resize(static_cast<Eigen::Index>(indices.size()),
                     vectors.cols());
  out.ids.resize(indices.size());
  if (labels) out.labels.emplace(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= size())
      throw std::out_of_range("EmbeddingSet::subset: index " +
                              std::to_string(i) + " out of range");
    out.vectors.row(static_cast<Eigen::Index>(r)) =
        vectors.row(static_cast<Eigen::Index>(i));
    out.ids[r] = ids[i];
    if (labels) (*out.labels)[r] = (*labels)[i];
  }
  return out;
}

EmbeddingSet EmbeddingSet::without_labels() const {
  EmbeddingSet out;
  out.vectors = vectors;
  out.ids = ids;
  return out;
}

int EmbeddingSet::num_classes() const {
  if (!labels || labels->empty()) return 0;
  std::int32_t top = 0;
  for (std::int32_t l : *labels) top = std::max(top, l);
  return top + 1;
}

void EmbeddingSet::validate() const {
  if (ids.size() != size())
    throw std::invalid_argument("EmbeddingSet: ids size mismatch");
  std::unordered_set<std::int64_t> seen;
  for (std::int64_t id : ids) {
    if (!seen.insert(id).second)
      throw std::invalid_argument("EmbeddingSet: duplicate id " +
                                  std::to_string(id));
  }
  if (labels) {
    if (labels->size() != size())
      throw std::invalid_argument("EmbeddingSet: labels size mismatch");
    for (std::int32_t l : *labels)
      if (l < 0)
        throw std::invalid_argument("EmbeddingSet: negative label " +
                                    std::to_string(l));
  }
}

namespace {

std::filesystem::path header_path(const std::filesystem::path& path) {
  if (path.extension() == ".json") return path;
  auto p = path;
  p += ".json";
  return p;
}

std::filesystem::path data_path(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".bin");
  return p;
}

template <typename T>
void write_raw(std::ostream& out, const T* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_raw(std::istream& in, T* data, std::size_t count,
              std::size_t offset, const std::string& what) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T)) {
    std::ostringstream msg;
    msg << "embedding data truncated while reading " << what << ": expected "
        << count * sizeof(T) << " bytes at offset " << offset << ", got "
        << in.gcount();
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

void save_embedding_set(const EmbeddingSet& set,
                        const std::filesystem::path& path) {
  set.validate();
  const auto hpath = header_path(path);
  const auto dpath = data_path(hpath);

  nlohmann::json header;
  header["n"] = set.size();
  header["d"] = set.dim();
  header["dtype"] = "f32";
  header["labels"] = set.labels.has_value();
  header["ids"] = true;

  std::ofstream hf(hpath);
  if (!hf) throw std::runtime_error("cannot open " + hpath.string());
  hf << header.dump(2) << "\n";

  std::ofstream df(dpath, std::ios::binary);
  if (!df) throw std::runtime_error("cannot open " + dpath.string());
  const std::size_t n = set.size();
  const std::size_t d = set.dim();
  std::vector<float> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      row[j] = static_cast<float>(
          set.vectors(static_cast<Eigen::Index>(i),
                      static_cast<Eigen::Index>(j)));
    write_raw(df, row.data(), d);
  }
  if (set.labels) write_raw(df, set.labels->data(), n);
  write_raw(df, set.ids.data(), n);
  if (!df) throw std::runtime_error("write failed for " + dpath.string());
}

EmbeddingSet load_embedding_set(const std::filesystem::path& path) {
  const auto hpath = header_path(path);
  std::ifstream hf(hpath);
  if (!hf) throw std::runtime_error("cannot open " + hpath.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hf);
  } catch (const nlohmann::json::parse_error& e) {
    std::ostringstream msg;
    msg << hpath.string() << ": malformed JSON header at byte " << e.byte
        << ": " << e.what();
    throw std::runtime_error(msg.str());
  }
  for (const char* field : {"n", "d", "dtype", "labels", "ids"}) {
    if (!header.contains(field))
      throw std::runtime_error(hpath.string() +
                               ": header missing field \"" + field + "\"");
  }
  if (header["dtype"].get<std::string>() != "f32")
    throw std::runtime_error(hpath.string() +
                             ": unsupported value in field \"dtype\" "
                             "(only \"f32\" is supported)");
  if (!header["n"].is_number_unsigned() || !header["d"].is_number_unsigned())
    throw std::runtime_error(hpath.string() +
                             ": fields \"n\" and \"d\" must be nonnegative "
                             "integers");
  const auto n = header["n"].get<std::size_t>();
  const auto d = header["d"].get<std::size_t>();
  if (d < 1)
    throw std::runtime_error(hpath.string() + ": field \"d\" must be >= 1");
  const bool has_labels = header["labels"].get<bool>();
  const bool has_ids = header["ids"].get<bool>();

  const auto dpath = data_path(hpath);
  std::ifstream df(dpath, std::ios::binary);
  if (!df) throw std::runtime_error("cannot open " + dpath.string());

  EmbeddingSet set;
  set.vectors.resize(static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(d));
  std::vector<float> row(d);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    read_raw(df, row.data(), d, offset, "vectors");
    offset += d * sizeof(float);
    for (std::size_t j = 0; j < d; ++j)
      set.vectors(static_cast<Eigen::Index>(i),
                  static_cast<Eigen::Index>(j)) = row[j];
  }
  if (has_labels) {
    set.labels.emplace(n);
    read_raw(df, set.labels->data(), n, offset, "labels");
    offset += n * sizeof(std::int32_t);
  }
  if (has_ids) {
    set.ids.resize(n);
    read_raw(df, set.ids.data(), n, offset, "ids");
    offset += n * sizeof(std::int64_t);
  } else {
    set.ids = iota_ids(n);
  }
  char extra;
  if (df.read(&extra, 1); df.gcount() != 0) {
    throw std::runtime_error(dpath.string() +
                             ": trailing bytes after offset " +
                             std::to_string(offset));
  }
  set.validate();
  return set;
}

}  // namespace smisel
