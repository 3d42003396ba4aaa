#include "rtxc/serialize.hpp"

namespace rtxc::io {

Container image_series_to_container(const ImageSeries& series) {
  Container c;
  c.add_c8("image", series.data,
           {static_cast<size_t>(series.frames), static_cast<size_t>(series.ny),
            static_cast<size_t>(series.nx)});
  c.metadata["pixel_mm"] = series.pixel_mm;
  c.metadata["frame_interval_ms"] = series.frame_interval_ms;
  return c;
}

ImageSeries image_series_from_container(const Container& c, const std::string& name) {
  const Array& a = c.get(name);
  require(a.shape.size() == 3, "serialize: image array must be frames x ny x nx");
  ImageSeries s(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]),
                static_cast<int>(a.shape[2]));
  s.data = as_c8(a);
  s.pixel_mm = c.metadata.value("pixel_mm", 1.0);
  s.frame_interval_ms = c.metadata.value("frame_interval_ms", 0.0);
  return s;
}

void add_pattern(Container& c, const sampling::SamplingPattern& pattern) {
  std::vector<int64_t> flat, offsets{0};
  for (const auto& frame : pattern.lines) {
    for (int k : frame) flat.push_back(k);
    offsets.push_back(static_cast<int64_t>(flat.size()));
  }
  c.add_i8("pattern_lines", flat);
  c.add_i8("pattern_offsets", offsets);
  c.metadata["pattern"] = {{"ny", pattern.ny},
                           {"frames", pattern.frames},
                           {"lines_per_frame", pattern.lines_per_frame},
                           {"nominal_r", pattern.nominal_r},
                           {"density_exponent", pattern.density_exponent},
                           {"center_weight", pattern.center_weight},
                           {"dropped_duplicates", pattern.dropped_duplicates}};
}

sampling::SamplingPattern pattern_from_container(const Container& c) {
  const auto flat = as_i8(c.get("pattern_lines"));
  const auto offsets = as_i8(c.get("pattern_offsets"));
  const auto& meta = c.metadata.at("pattern");

  sampling::SamplingPattern p;
  p.ny = meta.at("ny").get<int>();
  p.frames = meta.at("frames").get<int>();
  p.lines_per_frame = meta.at("lines_per_frame").get<int>();
  p.nominal_r = meta.at("nominal_r").get<double>();
  p.density_exponent = meta.at("density_exponent").get<double>();
  p.center_weight = meta.at("center_weight").get<double>();
  p.dropped_duplicates = meta.at("dropped_duplicates").get<int>();
  p.lines.resize(p.frames);
  for (int f = 0; f < p.frames; ++f)
    for (int64_t i = offsets[f]; i < offsets[f + 1]; ++i)
      p.lines[f].push_back(static_cast<int>(flat[i]));
  return p;
}

Container kspace_to_container(const KSpaceSeries& ks) {
  Container c;
  c.add_c8("kspace", ks.data,
           {static_cast<size_t>(ks.frames), static_cast<size_t>(ks.coils),
            static_cast<size_t>(ks.ny), static_cast<size_t>(ks.nx)});
  add_pattern(c, ks.pattern);
  c.metadata["tr_ms"] = ks.tr_ms;
  c.metadata["noise_sigma"] = ks.noise_sigma;
  c.metadata["venc_cms"] = ks.venc_cms;
  c.metadata["encoding"] = to_string(ks.encoding);
  return c;
}

KSpaceSeries kspace_from_container(const Container& c) {
  const Array& a = c.get("kspace");
  require(a.shape.size() == 4, "serialize: kspace array must be frames x coils x ny x nx");
  KSpaceSeries ks(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]),
                  static_cast<int>(a.shape[2]), static_cast<int>(a.shape[3]));
  ks.data = as_c8(a);
  ks.pattern = pattern_from_container(c);
  ks.tr_ms = c.metadata.value("tr_ms", 0.0);
  ks.noise_sigma = c.metadata.value("noise_sigma", 0.0);
  ks.venc_cms = c.metadata.value("venc_cms", 0.0);
  const std::string enc = c.metadata.value("encoding", "none");
  ks.encoding = enc == "compensated" ? FlowEncoding::compensated
                : enc == "encoded"   ? FlowEncoding::encoded
                                     : FlowEncoding::none;
  return ks;
}

Container overlay_to_container(const std::vector<physio::OverlayRecord>& records) {
  std::vector<int64_t> frame, row, col;
  std::vector<double> resp;
  for (const auto& r : records) {
    frame.push_back(r.frame);
    resp.push_back(r.resp);
    row.push_back(r.row);
    col.push_back(r.col);
  }
  Container c;
  c.add_i8("frame", frame);
  c.add_f8("resp", resp);
  c.add_i8("marker_row", row);
  c.add_i8("marker_col", col);
  return c;
}

std::vector<physio::OverlayRecord> overlay_from_container(const Container& c) {
  const auto frame = as_i8(c.get("frame"));
  const auto resp = as_f8(c.get("resp"));
  const auto row = as_i8(c.get("marker_row"));
  const auto col = as_i8(c.get("marker_col"));
  require(frame.size() == resp.size() && frame.size() == row.size() &&
              frame.size() == col.size(),
          "serialize: overlay arrays disagree in length");
  std::vector<physio::OverlayRecord> records(frame.size());
  for (size_t i = 0; i < records.size(); ++i) {
    records[i].frame = static_cast<int>(frame[i]);
    records[i].resp = resp[i];
    records[i].row = static_cast<int>(row[i]);
    records[i].col = static_cast<int>(col[i]);
  }
  return records;
}

}  // namespace rtxc::io
