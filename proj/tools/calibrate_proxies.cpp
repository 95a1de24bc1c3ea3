// Derives proxy normalization scales from a corpus.
//
//   calibrate_proxies <image.png>...
//
// For each image the sharpest default variant (smallest scale) is compared with
// the original. A proxy's scale is chosen so that, averaged over the corpus, its
// normalized gain from original to variant equals one third of the variant's MSE
// cost. With three proxies the perceptual gain then balances the reconstruction
// cost at lambda = 0.5.

#include <iostream>

#include "freqmix/io/fs_util.hpp"
#include "freqmix/io/png_io.hpp"
#include "freqmix/objective.hpp"
#include "freqmix/variants.hpp"

int main(int argc, char** argv) {
  using namespace freqmix;
  if (argc < 2) {
    std::cerr << "usage: calibrate_proxies <image.png>...\n";
    return 2;
  }
  const ProxyId ids[] = {ProxyId::HighFrequencyRatio, ProxyId::Tenengrad, ProxyId::LaplacianVariance};
  double gain[3] = {0.0, 0.0, 0.0};
  double cost = 0.0;
  for (int a = 1; a < argc; ++a) {
    const Image original = io::read_image(argv[a]);
    const Image sharp = make_variant_set(original, VariantConfig{}).front();
    cost += recon_loss(sharp, original);
    for (int k = 0; k < 3; ++k) gain[k] += raw_proxy(sharp, ids[k]) - raw_proxy(original, ids[k]);
  }
  for (int k = 0; k < 3; ++k) {
    std::cout << to_string(ids[k]) << "\tscale\t" << io::format_double(3.0 * gain[k] / cost) << '\n';
  }
  return 0;
}
