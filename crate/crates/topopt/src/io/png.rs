//! Grayscale raster of the material layout (chi_v of the level set sampled on
//! a pixel grid over the bounding box), written as an 8-bit PNG.
//!
//! The encoder is self-contained: zlib stream with stored deflate blocks, so
//! no compression dependency. Material is black (0), void is white (255).

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::levelset::chi_v;
use crate::mesh2d::TriMesh;

/// Uniform-grid triangle locator for point sampling.
struct Locator<'a> {
    mesh: &'a TriMesh,
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl<'a> Locator<'a> {
    fn new(mesh: &'a TriMesh) -> Self {
        let (min, max) = bounding_box(mesh);
        let spanx = max[0] - min[0];
        let spany = max[1] - min[1];
        let target = (mesh.triangle_count() as f64 / 2.0).sqrt().ceil().max(1.0);
        let cell = (spanx.max(spany) / target).max(1e-9);
        let nx = (spanx / cell).ceil() as usize + 1;
        let ny = (spany / cell).ceil() as usize + 1;
        let mut bins = vec![Vec::new(); nx * ny];
        for t in 0..mesh.triangle_count() {
            let c = mesh.triangle_coords(t);
            let bx0 = (((c[0][0].min(c[1][0]).min(c[2][0])) - min[0]) / cell) as usize;
            let bx1 = (((c[0][0].max(c[1][0]).max(c[2][0])) - min[0]) / cell) as usize;
            let by0 = (((c[0][1].min(c[1][1]).min(c[2][1])) - min[1]) / cell) as usize;
            let by1 = (((c[0][1].max(c[1][1]).max(c[2][1])) - min[1]) / cell) as usize;
            for by in by0..=by1.min(ny - 1) {
                for bx in bx0..=bx1.min(nx - 1) {
                    bins[by * nx + bx].push(t as u32);
                }
            }
        }
        Self {
            mesh,
            x0: min[0],
            y0: min[1],
            cell,
            nx,
            ny,
            bins,
        }
    }

    /// Barycentric coordinates of `p` in the containing triangle, if any.
    fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let bx = (((p[0] - self.x0) / self.cell) as usize).min(self.nx - 1);
        let by = (((p[1] - self.y0) / self.cell) as usize).min(self.ny - 1);
        for &t in &self.bins[by * self.nx + bx] {
            let t = t as usize;
            let [a, b, c] = self.mesh.triangle_coords(t);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det;
            let l2 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / det;
            let l3 = 1.0 - l1 - l2;
            let eps = -1e-12;
            if l1 >= eps && l2 >= eps && l3 >= eps {
                return Some((t, [l1, l2, l3]));
            }
        }
        None
    }
}

fn bounding_box(mesh: &TriMesh) -> ([f64; 2], [f64; 2]) {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for &[x, y] in mesh.nodes() {
        min[0] = min[0].min(x);
        min[1] = min[1].min(y);
        max[0] = max[0].max(x);
        max[1] = max[1].max(y);
    }
    (min, max)
}

/// Sample chi_v of the P1 level set on a width-by-height pixel grid over the
/// bounding box. Returns (width, height, grayscale rows, top row first).
pub fn rasterize_layout(mesh: &TriMesh, phi: &[f64], width: u32) -> (u32, u32, Vec<u8>) {
    assert!(width >= 1);
    let (min, max) = bounding_box(mesh);
    let spanx = max[0] - min[0];
    let spany = max[1] - min[1];
    let height = ((width as f64 * spany / spanx).round() as u32).max(1);
    let loc = Locator::new(mesh);
    let px = spanx / width as f64;
    let py = spany / height as f64;
    let mut pixels = vec![255u8; (width * height) as usize];
    for j in 0..height {
        let y = max[1] - (j as f64 + 0.5) * py;
        for i in 0..width {
            let x = min[0] + (i as f64 + 0.5) * px;
            if let Some((t, l)) = loc.locate([x, y]) {
                let [a, b, c] = mesh.triangles()[t];
                let v = l[0] * phi[a] + l[1] * phi[b] + l[2] * phi[c];
                let gray = (255.0 * (1.0 - chi_v(v))).round().clamp(0.0, 255.0) as u8;
                pixels[(j * width + i) as usize] = gray;
            }
        }
    }
    (width, height, pixels)
}

pub fn write_png_layout(mesh: &TriMesh, phi: &[f64], width: u32, path: &Path) -> Result<()> {
    let (w, h, pixels) = rasterize_layout(mesh, phi, width);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_grayscale_png(w, h, &pixels))?;
    Ok(())
}

fn crc32(data: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (n, slot) in table.iter_mut().enumerate() {
        let mut c = n as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
        }
        *slot = c;
    }
    let mut crc = 0xFFFF_FFFFu32;
    for &b in data {
        crc = table[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8);
    }
    crc ^ 0xFFFF_FFFF
}

fn adler32(data: &[u8]) -> u32 {
    const MOD: u32 = 65521;
    let (mut a, mut b) = (1u32, 0u32);
    for chunk in data.chunks(5552) {
        for &byte in chunk {
            a += byte as u32;
            b += a;
        }
        a %= MOD;
        b %= MOD;
    }
    (b << 16) | a
}

fn push_chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    let mut crc_input = Vec::with_capacity(4 + data.len());
    crc_input.extend_from_slice(kind);
    crc_input.extend_from_slice(data);
    out.extend_from_slice(&crc32(&crc_input).to_be_bytes());
}

/// 8-bit grayscale PNG with stored (uncompressed) deflate blocks.
pub fn encode_grayscale_png(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), (width * height) as usize);
    // raw scanline stream: filter byte 0 per row
    let mut raw = Vec::with_capacity(pixels.len() + height as usize);
    for row in pixels.chunks(width as usize) {
        raw.push(0);
        raw.extend_from_slice(row);
    }
    // zlib wrapper, deflate stored blocks of at most 65535 bytes
    let mut z = vec![0x78, 0x01];
    let blocks: Vec<&[u8]> = raw.chunks(65535).collect();
    for (k, block) in blocks.iter().enumerate() {
        let last = k + 1 == blocks.len();
        z.push(if last { 1 } else { 0 });
        let len = block.len() as u16;
        z.extend_from_slice(&len.to_le_bytes());
        z.extend_from_slice(&(!len).to_le_bytes());
        z.extend_from_slice(block);
    }
    z.extend_from_slice(&adler32(&raw).to_be_bytes());

    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, 0, 0, 0, 0]); // depth 8, grayscale, no interlace

    let mut out = vec![0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];
    push_chunk(&mut out, b"IHDR", &ihdr);
    push_chunk(&mut out, b"IDAT", &z);
    push_chunk(&mut out, b"IEND", &[]);
    out
}
