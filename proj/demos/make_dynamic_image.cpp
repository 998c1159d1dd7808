// Minimal end-to-end example: synthesize a short clip of a square moving
// across the frame, pool it four different ways and write the results as
// PNGs next to the working directory.

#include <cstdio>

#include "dynimg/dynimg.hpp"

int main() {
    using namespace dynimg;

    const std::size_t frames = 24, side = 96, box = 18;
    std::vector<Tensor> clip;
    for (std::size_t t = 0; t < frames; ++t) {
        std::vector<double> pixels(side * side, 0.1);
        const std::size_t offset = 4 + t * 3;
        for (std::size_t y = offset; y < offset + box && y < side; ++y) {
            for (std::size_t x = offset; x < offset + box && x < side; ++x) {
                pixels[y * side + x] = 1.0;
            }
        }
        clip.emplace_back(std::vector<std::size_t>{1, side, side}, std::move(pixels));
    }
    const FrameSequence video(std::move(clip), Modality::gray);

    write_image(di_export(arp(video, Variant::avg)), "demo_arp.png");
    write_image(di_export(mean_pool(video)), "demo_mean.png");
    write_image(di_export(max_pool(video)), "demo_max.png");
    write_image(di_export(mhi(video)), "demo_mhi.png");

    const MdiResult multi = mdi(video, WindowSpec{8, 4, Merge::max},
                                PoolingMethod{PoolKind::arp_avg});
    write_image(di_export(*multi.merged), "demo_mdi_merged.png");

    std::printf("wrote demo_arp.png demo_mean.png demo_max.png demo_mhi.png demo_mdi_merged.png\n");
    return 0;
}
