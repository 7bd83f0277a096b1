#include "mono3d/kitti_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "mono3d/errors.hpp"
#include "mono3d/losses.hpp"

namespace mono3d {

namespace {

constexpr std::array<std::pair<std::string_view, Category>, 9> kCategoryNames = {{
    {"Car", Category::Car},
    {"Pedestrian", Category::Pedestrian},
    {"Cyclist", Category::Cyclist},
    {"Van", Category::Van},
    {"Truck", Category::Truck},
    {"Person_sitting", Category::PersonSitting},
    {"Tram", Category::Tram},
    {"Misc", Category::Misc},
    {"DontCare", Category::DontCare},
}};

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_double(std::string_view token, std::size_t line, int field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("expected a real number, got '" + std::string(token) + "'", line, field);
  }
  return value;
}

int parse_int_like(std::string_view token, std::size_t line, int field) {
  double value = parse_double(token, line, field);
  double rounded = std::nearbyint(value);
  if (std::abs(value - rounded) > 1e-9) {
    throw ParseError("expected an integer, got '" + std::string(token) + "'", line, field);
  }
  return static_cast<int>(rounded);
}

ObjectLabel parse_label_line(std::string_view line, std::size_t line_no) {
  const auto tokens = split_tokens(line);
  if (tokens.size() != 15 && tokens.size() != 16) {
    throw ParseError("expected 15 or 16 fields, got " + std::to_string(tokens.size()), line_no);
  }

  ObjectLabel obj;
  auto category = category_from_string(tokens[0]);
  if (!category) {
    throw ParseError("unknown category '" + std::string(tokens[0]) + "'", line_no, 0);
  }
  obj.category = *category;
  obj.truncation = parse_double(tokens[1], line_no, 1);
  obj.occlusion = parse_int_like(tokens[2], line_no, 2);
  obj.alpha = normalize_angle(parse_double(tokens[3], line_no, 3));
  obj.box2d.left = parse_double(tokens[4], line_no, 4);
  obj.box2d.top = parse_double(tokens[5], line_no, 5);
  obj.box2d.right = parse_double(tokens[6], line_no, 6);
  obj.box2d.bottom = parse_double(tokens[7], line_no, 7);
  obj.h = parse_double(tokens[8], line_no, 8);
  obj.w = parse_double(tokens[9], line_no, 9);
  obj.l = parse_double(tokens[10], line_no, 10);
  obj.x = parse_double(tokens[11], line_no, 11);
  obj.y = parse_double(tokens[12], line_no, 12);
  obj.z = parse_double(tokens[13], line_no, 13);
  obj.rotation_y = normalize_angle(parse_double(tokens[14], line_no, 14));
  if (tokens.size() == 16) obj.score = parse_double(tokens[15], line_no, 15);

  if (obj.box2d.right < obj.box2d.left) {
    throw ParseError("2D box has right < left", line_no, 6);
  }
  if (obj.box2d.bottom < obj.box2d.top) {
    throw ParseError("2D box has bottom < top", line_no, 7);
  }
  // DontCare rows legitimately carry -1 dimensions; everything else must be
  // a real box.
  if (!obj.is_dontcare() && (obj.h <= 0.0 || obj.w <= 0.0 || obj.l <= 0.0)) {
    throw ParseError("non-positive 3D dimensions", line_no, obj.h <= 0.0 ? 8 : (obj.w <= 0.0 ? 9 : 10));
  }
  return obj;
}

void append_real(std::string& out, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  out += buf;
}

nlohmann::json require_key(const nlohmann::json& record, const char* key, std::size_t index) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError("record " + std::to_string(index) + " is missing key '" + key + "'");
  }
  return *it;
}

template <std::size_t N>
std::array<double, N> require_array(const nlohmann::json& record, const char* key,
                                    std::size_t index) {
  auto value = require_key(record, key, index);
  if (!value.is_array() || value.size() != N) {
    throw ParseError("record " + std::to_string(index) + " key '" + key + "' must be an array of " +
                     std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!value[i].is_number()) {
      throw ParseError("record " + std::to_string(index) + " key '" + key +
                       "' has a non-numeric entry");
    }
    out[i] = value[i].get<double>();
  }
  return out;
}

double require_number(const nlohmann::json& record, const char* key, std::size_t index) {
  auto value = require_key(record, key, index);
  if (!value.is_number()) {
    throw ParseError("record " + std::to_string(index) + " key '" + key + "' must be a number");
  }
  return value.get<double>();
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [name, cat] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "Misc";
}

std::optional<Category> category_from_string(std::string_view name) {
  for (const auto& [known, cat] : kCategoryNames) {
    if (known == name) return cat;
  }
  return std::nullopt;
}

Calibration::Calibration(const std::array<double, 12>& row_major) : p_(row_major) {
  canonical_ = std::abs(p_[8]) <= 1e-9 && std::abs(p_[9]) <= 1e-9 && std::abs(p_[10] - 1.0) <= 1e-9;
  if (!(fu() > 0.0) || !(fv() > 0.0)) {
    throw InvalidArgument("projection matrix has non-positive focal length");
  }
}

std::vector<ObjectLabel> parse_label_file(std::string_view text) {
  std::vector<ObjectLabel> objects;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    objects.push_back(parse_label_line(line, line_no));
  }
  return objects;
}

Calibration parse_calib_file(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tokens = split_tokens(line);
    if (tokens.empty() || (tokens[0] != "P2:" && tokens[0] != "P2")) continue;
    if (tokens.size() != 13) {
      throw ParseError("P2 line must carry 12 values, got " + std::to_string(tokens.size() - 1),
                       line_no);
    }
    std::array<double, 12> p{};
    for (int i = 0; i < 12; ++i) {
      p[static_cast<std::size_t>(i)] = parse_double(tokens[static_cast<std::size_t>(i) + 1], line_no, i + 1);
    }
    return Calibration(p);
  }
  throw ParseError("calibration file has no P2 line");
}

std::vector<RawHeadOutputs> parse_raw_outputs(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw ParseError("raw-outputs file must be a JSON array of records");
  }

  std::vector<RawHeadOutputs> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& record = doc[i];
    if (!record.is_object()) {
      throw ParseError("record " + std::to_string(i) + " is not an object");
    }
    RawHeadOutputs raw;
    raw.coarse_center = require_array<2>(record, "coarse_center", i);
    raw.offset2d = require_array<2>(record, "offset2d", i);
    raw.offset3d = require_array<2>(record, "offset3d", i);
    raw.depth = require_number(record, "depth", i);
    if (raw.depth <= 0.0) {
      throw ParseError("record " + std::to_string(i) + " has non-positive depth");
    }
    if (auto it = record.find("depth_sigma"); it != record.end() && !it->is_null()) {
      if (!it->is_number()) {
        throw ParseError("record " + std::to_string(i) + " key 'depth_sigma' must be a number");
      }
      raw.depth_sigma = it->get<double>();
      if (*raw.depth_sigma <= 0.0) {
        throw ParseError("record " + std::to_string(i) + " has non-positive depth_sigma");
      }
    }
    raw.size3d = require_array<3>(record, "size3d", i);
    auto logits = require_key(record, "heading_bin_logits", i);
    if (!logits.is_array() || logits.size() != 12) {
      throw ParseError("record " + std::to_string(i) + " must carry exactly 12 heading logits, got " +
                       std::to_string(logits.is_array() ? logits.size() : 0));
    }
    for (std::size_t b = 0; b < 12; ++b) {
      if (!logits[b].is_number()) {
        throw ParseError("record " + std::to_string(i) + " has a non-numeric heading logit");
      }
      raw.heading_bin_logits[b] = logits[b].get<double>();
    }
    raw.heading_residual = require_number(record, "heading_residual", i);
    raw.score = require_number(record, "score", i);
    out.push_back(raw);
  }
  return out;
}

std::string write_label_file(std::span<const ObjectLabel> objects) {
  std::string out;
  out.reserve(objects.size() * 120);
  for (const ObjectLabel& o : objects) {
    out += to_string(o.category);
    out += ' ';
    append_real(out, o.truncation);
    out += ' ';
    out += std::to_string(o.occlusion);
    for (double v : {o.alpha, o.box2d.left, o.box2d.top, o.box2d.right, o.box2d.bottom, o.h, o.w,
                     o.l, o.x, o.y, o.z, o.rotation_y}) {
      out += ' ';
      append_real(out, v);
    }
    if (o.score) {
      out += ' ';
      append_real(out, *o.score);
    }
    out += '\n';
  }
  return out;
}

}  // namespace mono3d
