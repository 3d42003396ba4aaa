#pragma once

#include "rtxc/container.hpp"
#include "rtxc/physio.hpp"
#include "rtxc/sampling.hpp"
#include "rtxc/types.hpp"

namespace rtxc::io {

/// Container adapters for the core data types. Complex data narrows to
/// complex64 on disk (the container's pinned representation).
Container image_series_to_container(const ImageSeries& series);
ImageSeries image_series_from_container(const Container& c, const std::string& name = "image");

void add_pattern(Container& c, const sampling::SamplingPattern& pattern);
sampling::SamplingPattern pattern_from_container(const Container& c);

Container kspace_to_container(const KSpaceSeries& ks);
KSpaceSeries kspace_from_container(const Container& c);

Container overlay_to_container(const std::vector<physio::OverlayRecord>& records);
std::vector<physio::OverlayRecord> overlay_from_container(const Container& c);

}  // namespace rtxc::io
