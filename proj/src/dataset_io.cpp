#include "bwnn/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bwnn {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void default_split(Dataset& ds, double train_fraction = 0.7) {
  const int m = static_cast<int>(ds.inputs.rows);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(ds.seed, 23);
  for (int i = m - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<int>(rng.next_index(i + 1))]);
  const int n_train = std::max(1, static_cast<int>(m * train_fraction));
  ds.train_idx.assign(order.begin(), order.begin() + std::min(n_train, m));
  ds.test_idx.assign(order.begin() + std::min(n_train, m), order.end());
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_csv: empty file " + path);

  std::vector<std::string> header = split_csv_line(line);
  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_col = static_cast<int>(i);
  if (label_col < 0)
    throw std::runtime_error("load_csv: missing label column '" + label_column + "'");

  const int n_features = static_cast<int>(header.size()) - 1;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  int row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(row_no) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    std::vector<double> feats;
    feats.reserve(n_features);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == label_col) continue;
      char* end = nullptr;
      double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw std::runtime_error("load_csv: non-numeric cell at row " + std::to_string(row_no) +
                                 " column '" + header[c] + "'");
      feats.push_back(v);
    }
    double n = norm2(feats);
    if (n == 0.0)
      throw std::runtime_error("load_csv: zero-norm row " + std::to_string(row_no) +
                               " cannot be normalized");
    for (auto& v : feats) v /= n;
    rows.push_back(std::move(feats));
    raw_labels.push_back(cells[label_col]);
  }

  Dataset ds;
  ds.name = path;
  ds.inputs = Matrix(rows.size(), n_features);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < n_features; ++j) ds.inputs(i, j) = rows[i][j];

  // First-seen label ordering.
  std::map<std::string, int> classes;
  for (const auto& l : raw_labels)
    if (!classes.count(l)) {
      int id = static_cast<int>(ds.class_names.size());
      classes[l] = id;
      ds.class_names.push_back(l);
    }
  ds.labels.resize(raw_labels.size());
  ds.targets.resize(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    ds.labels[i] = classes[raw_labels[i]];
    // Binary datasets get +/-1 regression targets; multiclass keeps the index.
    ds.targets[i] = classes.size() == 2 ? (ds.labels[i] == 1 ? 1.0 : -1.0)
                                        : static_cast<double>(ds.labels[i]);
  }
  default_split(ds);
  return ds;
}

void write_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("write_csv: cannot open " + tmp);
    for (std::size_t j = 0; j < data.inputs.cols; ++j) os << 'f' << j << ',';
    os << label_column << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < data.inputs.rows; ++i) {
      for (std::size_t j = 0; j < data.inputs.cols; ++j) os << data.inputs(i, j) << ',';
      if (data.is_classification())
        os << data.class_names[data.labels[i]] << '\n';
      else
        os << data.targets[i] << '\n';
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(std::string("load_idx: truncated ") + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, int subsample,
                 std::uint64_t seed) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw std::runtime_error("load_idx: cannot open " + labels_path);

  if (read_be32(imgs, "image magic") != 0x00000803u)
    throw std::runtime_error("load_idx: bad image magic (expected 0x00000803)");
  const std::uint32_t n_images = read_be32(imgs, "image count");
  const std::uint32_t rows = read_be32(imgs, "image rows");
  const std::uint32_t cols = read_be32(imgs, "image cols");

  if (read_be32(labs, "label magic") != 0x00000801u)
    throw std::runtime_error("load_idx: bad label magic (expected 0x00000801)");
  const std::uint32_t n_labels = read_be32(labs, "label count");
  if (n_images != n_labels) throw std::runtime_error("load_idx: image/label count mismatch");

  const std::size_t pix = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> payload(static_cast<std::size_t>(n_images) * pix);
  if (!imgs.read(reinterpret_cast<char*>(payload.data()), payload.size()))
    throw std::runtime_error("load_idx: truncated image payload");
  std::vector<unsigned char> label_bytes(n_labels);
  if (!labs.read(reinterpret_cast<char*>(label_bytes.data()), label_bytes.size()))
    throw std::runtime_error("load_idx: truncated label payload");

  std::vector<int> keep(n_images);
  std::iota(keep.begin(), keep.end(), 0);
  if (subsample > 0 && subsample < static_cast<int>(n_images)) {
    Rng rng(seed, 29);
    for (int i = static_cast<int>(n_images) - 1; i > 0; --i)
      std::swap(keep[i], keep[static_cast<int>(rng.next_index(i + 1))]);
    keep.resize(subsample);
    std::sort(keep.begin(), keep.end());
  }

  Dataset ds;
  ds.name = images_path;
  ds.seed = seed;
  ds.inputs = Matrix(keep.size(), pix);
  ds.labels.resize(keep.size());
  ds.targets.resize(keep.size());
  int max_label = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const unsigned char* src = &payload[static_cast<std::size_t>(keep[i]) * pix];
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < pix; ++j) {
      double v = src[j] / 255.0;
      ds.inputs(i, j) = v;
      norm_sq += v * v;
    }
    if (norm_sq == 0.0)
      throw std::runtime_error("load_idx: zero image " + std::to_string(keep[i]));
    double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t j = 0; j < pix; ++j) ds.inputs(i, j) *= inv;
    ds.labels[i] = label_bytes[keep[i]];
    max_label = std::max(max_label, ds.labels[i]);
  }
  for (int l = 0; l <= max_label; ++l) ds.class_names.push_back(std::to_string(l));
  for (std::size_t i = 0; i < keep.size(); ++i)
    ds.targets[i] = max_label == 1 ? (ds.labels[i] == 1 ? 1.0 : -1.0)
                                   : static_cast<double>(ds.labels[i]);
  default_split(ds);
  return ds;
}

}  // namespace bwnn
