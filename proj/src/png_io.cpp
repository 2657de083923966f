#include "ctxr/png_io.hpp"

#include "ctxr/error.hpp"

#include <png.h>

#include <cstring>

namespace ctxr {

void write_png_gray8(const Gray8& image, const std::filesystem::path& path)
{
    if (image.empty()) throw Error(ErrorCode::argument, "cannot write an empty image to '" + path.string() + "'");
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.data.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::io, "cannot write PNG '" + path.string() + "': " + msg);
    }
}

Gray8 read_png_gray8(const std::filesystem::path& path)
{
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw Error(ErrorCode::io, "cannot read PNG '" + path.string() + "': " + png.message);
    png.format = PNG_FORMAT_GRAY;
    Gray8 out(png.width, png.height);
    if (!png_image_finish_read(&png, nullptr, out.data.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::format, "cannot decode PNG '" + path.string() + "': " + msg);
    }
    return out;
}

} // namespace ctxr
