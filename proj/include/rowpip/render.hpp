#pragma once

#include <string>

#include "rowpip/geo_raster.hpp"
#include "rowpip/weed_mapping.hpp"

namespace rowpip {

// Deterministic inspection renderings (fixed palettes, no metadata, so the
// same input always produces byte-identical PNGs).
//
// Mask palette: 0 -> soil brown (92,64,51), 1 -> vegetation green (58,160,58)
// or weed red (200,48,40) when weed_style is set.
void render_mask_png(const BinaryMask& mask, const std::string& path, bool weed_style = false);

// Prescription palette: spray cells green fill (58,160,58), no-spray cells
// white fill with a red outline (200,48,40), background white.
void render_prescription_png(const std::vector<PrescriptionMap>& maps, const std::string& path,
                             double pixels_per_meter = 10.0);

}  // namespace rowpip
