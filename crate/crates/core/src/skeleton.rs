//! Skeleton extraction: thinning, endpoint detection, spur pruning and
//! component selection. Foreground connectivity is 8-connectivity throughout.

use std::collections::{HashSet, VecDeque};

use crate::image::{BinaryImage, PixelCoord};

/// Ring of 8-neighbors, clockwise from north: N, NE, E, SE, S, SW, W, NW.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(img: &BinaryImage, p: PixelCoord) -> [bool; 8] {
    RING.map(|(dx, dy)| img.at(p.x + dx, p.y + dy))
}

fn neighbor_count(img: &BinaryImage, p: PixelCoord) -> usize {
    ring(img, p).iter().filter(|&&b| b).count()
}

fn neighbors(img: &BinaryImage, p: PixelCoord) -> impl Iterator<Item = PixelCoord> + '_ {
    RING.iter()
        .map(move |&(dx, dy)| p.offset(dx, dy))
        .filter(|q| img.at(q.x, q.y))
}

/// Number of 0 -> 1 transitions walking once around the ring.
fn transitions(n: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !n[k] && n[(k + 1) % 8]).count()
}

/// Yokoi connectivity number for 8-connected foreground. A foreground pixel
/// is simple (deletable without changing topology) iff this is 1.
fn connectivity_number(n: &[bool; 8]) -> usize {
    // 4-neighbors sit at even ring positions
    let bg = |k: usize| !n[k % 8];
    [0, 2, 4, 6]
        .iter()
        .filter(|&&k| bg(k) && !(bg(k + 1) && bg(k + 2)))
        .count()
}

fn zhang_suen_pass(img: &mut BinaryImage, second: bool) -> bool {
    let (w, h) = (img.width(), img.height());
    let mut candidates = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let n = ring(img, PixelCoord::new(x as i64, y as i64));
            let b = n.iter().filter(|&&v| v).count();
            if !(2..=6).contains(&b) || transitions(&n) != 1 {
                continue;
            }
            let [n2, _, n4, _, n6, _, n8, _] = n;
            let directional = if second {
                !(n2 && n4 && n8) && !(n2 && n6 && n8)
            } else {
                !(n2 && n4 && n6) && !(n4 && n6 && n8)
            };
            if directional {
                candidates.push((x, y));
            }
        }
    }
    // candidates come from the unmodified image; each deletion is rechecked
    // against the current one so two-pixel-thick runs cannot vanish
    let mut changed = false;
    for (x, y) in candidates {
        let n = ring(img, PixelCoord::new(x as i64, y as i64));
        if n.iter().filter(|&&v| v).count() >= 2 && connectivity_number(&n) == 1 {
            img.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Deletes simple non-end pixels left over after Zhang-Suen: corner fillers
/// of staircases and pixels of 2x2 blocks.
fn remove_redundant(img: &mut BinaryImage) -> bool {
    let (w, h) = (img.width(), img.height());
    let mut changed = false;
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let n = ring(img, PixelCoord::new(x as i64, y as i64));
            let b = n.iter().filter(|&&v| v).count();
            if b >= 2 && connectivity_number(&n) == 1 {
                img.set(x, y, false);
                changed = true;
            }
        }
    }
    changed
}

/// Thins foreground regions to one-pixel-wide curves.
///
/// Zhang-Suen subiterations run to convergence, each deletion rechecked for
/// simplicity against the partly updated image, then redundant simple pixels
/// are removed; the two alternate until neither changes anything. Every deletion is of a simple pixel, so the number of
/// 8-connected components is preserved.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    loop {
        while zhang_suen_pass(&mut out, false) | zhang_suen_pass(&mut out, true) {}
        if !remove_redundant(&mut out) {
            break;
        }
    }
    out
}

/// Foreground pixels with exactly one foreground 8-neighbor.
pub fn find_endpoints(img: &BinaryImage) -> Vec<PixelCoord> {
    img.ones()
        .filter(|&p| neighbor_count(img, p) == 1)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PruneParams {
    pub max_spur_length: usize,
}

/// A pixel at the free end of a branch: its neighbors form a single arc of
/// at most three ring positions. Covers endpoints and one-pixel bumps.
fn is_tip(img: &BinaryImage, p: PixelCoord) -> bool {
    let n = ring(img, p);
    let b = n.iter().filter(|&&v| v).count();
    (1..=3).contains(&b) && transitions(&n) == 1
}

fn mutually_connected(pixels: &[PixelCoord]) -> bool {
    let Some(&first) = pixels.first() else {
        return true;
    };
    let mut seen = vec![false; pixels.len()];
    seen[0] = true;
    let mut stack = vec![first];
    while let Some(p) = stack.pop() {
        for (k, q) in pixels.iter().enumerate() {
            if !seen[k] && (p.x - q.x).abs() <= 1 && (p.y - q.y).abs() <= 1 {
                seen[k] = true;
                stack.push(*q);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Walks from `tip` toward the rest of the skeleton. Returns the spur pixels
/// if a junction is reached within `max_len` pixels.
fn trace_spur(img: &BinaryImage, tip: PixelCoord, max_len: usize) -> Option<Vec<PixelCoord>> {
    let mut chain = vec![tip];
    let mut visited: HashSet<PixelCoord> = HashSet::from([tip]);
    loop {
        let head = *chain.last()?;
        let ahead: Vec<PixelCoord> = neighbors(img, head)
            .filter(|q| !visited.contains(q))
            .collect();
        match ahead.len() {
            0 => return None,
            1 => {
                if chain.len() > max_len {
                    return None;
                }
                visited.insert(ahead[0]);
                chain.push(ahead[0]);
            }
            _ => {
                // if the pixels ahead stay connected without `head`, it is
                // the spur's base; otherwise `head` is the junction itself
                if !mutually_connected(&ahead) {
                    chain.pop();
                }
                return (!chain.is_empty() && chain.len() <= max_len).then_some(chain);
            }
        }
    }
}

/// Removes spurs: chains walked from a free end that reach a junction within
/// `max_spur_length` pixels. Longer branches and junction-free pieces are
/// kept whole. Repeats until nothing changes.
pub fn prune(img: &BinaryImage, params: &PruneParams) -> BinaryImage {
    let mut out = img.clone();
    if params.max_spur_length == 0 {
        return out;
    }
    loop {
        let mut changed = false;
        let tips: Vec<PixelCoord> = out.ones().filter(|&p| is_tip(&out, p)).collect();
        for tip in tips {
            if !out.at(tip.x, tip.y) || !is_tip(&out, tip) {
                continue;
            }
            if let Some(spur) = trace_spur(&out, tip, params.max_spur_length) {
                for p in spur {
                    out.set(p.x as usize, p.y as usize, false);
                }
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Labels 8-connected components in row-major discovery order. Background
/// is 0, components are numbered from 1.
pub fn label_components(img: &BinaryImage) -> (Vec<u32>, usize) {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if img.data()[start] == 0 || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            let p = PixelCoord::new((k % w) as i64, (k / w) as i64);
            for q in neighbors(img, p) {
                let idx = q.y as usize * w + q.x as usize;
                if labels[idx] == 0 {
                    labels[idx] = count;
                    queue.push_back(idx);
                }
            }
        }
    }
    (labels, count as usize)
}

pub fn count_components(img: &BinaryImage) -> usize {
    label_components(img).1
}

/// Keeps only the largest 8-connected component. Among equal sizes the one
/// whose first pixel in row-major order comes first wins.
pub fn largest_component(img: &BinaryImage) -> BinaryImage {
    let (labels, count) = label_components(img);
    if count == 0 {
        return img.clone();
    }
    let mut sizes = vec![0usize; count + 1];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    // labels follow row-major discovery order, so the first maximum wins ties
    let mut best = 1;
    for l in 2..=count {
        if sizes[l] > sizes[best] {
            best = l;
        }
    }
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        labels[y * img.width() + x] == best as u32
    })
}

/// True when some 2x2 window is entirely foreground.
pub fn has_2x2_block(img: &BinaryImage) -> bool {
    (1..img.height()).any(|y| {
        (1..img.width()).any(|x| {
            img.get(x, y) && img.get(x - 1, y) && img.get(x, y - 1) && img.get(x - 1, y - 1)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_points(w: usize, h: usize, pts: &[(usize, usize)]) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| pts.contains(&(x, y)))
    }

    #[test]
    fn connectivity_number_cases() {
        // endpoint, line interior, isolated, interior
        let mut n = [false; 8];
        n[2] = true;
        assert_eq!(connectivity_number(&n), 1);
        n[6] = true;
        assert_eq!(connectivity_number(&n), 2);
        assert_eq!(connectivity_number(&[false; 8]), 0);
        assert_eq!(connectivity_number(&[true; 8]), 0);
        // staircase corner: W and S, joined diagonally through nothing
        let mut n = [false; 8];
        n[6] = true;
        n[4] = true;
        assert_eq!(connectivity_number(&n), 1);
    }

    #[test]
    fn thin_keeps_thin_lines() {
        let line = BinaryImage::from_fn(20, 5, |x, y| y == 2 && (2..18).contains(&x));
        assert_eq!(thin(&line), line);
        let diag = BinaryImage::from_fn(12, 12, |x, y| x == y && x > 0 && x < 11);
        assert_eq!(thin(&diag), diag);
        assert!(thin(&BinaryImage::zeros(6, 6)).is_empty());
    }

    #[test]
    fn thin_rectangle() {
        let rect =
            BinaryImage::from_fn(30, 15, |x, y| (5..25).contains(&x) && (5..10).contains(&y));
        let t = thin(&rect);
        assert!(t.is_subset_of(&rect));
        assert!(t.count_ones() <= 25, "{}", t.count_ones());
        assert_eq!(count_components(&t), 1);
        assert!(!has_2x2_block(&t));
        let xs: Vec<i64> = t.ones().map(|p| p.x).collect();
        assert!(*xs.iter().min().unwrap() <= 5 + 3);
        assert!(*xs.iter().max().unwrap() >= 24 - 3);
        assert_eq!(thin(&t), t);
    }

    #[test]
    fn thin_2x2_block_keeps_a_pixel() {
        let block = from_points(4, 4, &[(1, 1), (2, 1), (1, 2), (2, 2)]);
        let t = thin(&block);
        assert!(!t.is_empty());
        assert!(!has_2x2_block(&t));
        assert_eq!(count_components(&t), 1);
    }

    #[test]
    fn endpoints() {
        let line = BinaryImage::from_fn(14, 3, |x, y| y == 1 && (2..12).contains(&x));
        let e = find_endpoints(&line);
        assert_eq!(e, vec![PixelCoord::new(2, 1), PixelCoord::new(11, 1)]);

        assert!(find_endpoints(&from_points(3, 3, &[(1, 1)])).is_empty());

        let plus = BinaryImage::from_fn(11, 11, |x, y| {
            (x == 5 && (1..10).contains(&y)) || (y == 5 && (1..10).contains(&x))
        });
        assert_eq!(find_endpoints(&plus).len(), 4);
    }

    #[test]
    fn prune_examples() {
        let mut img = BinaryImage::from_fn(110, 10, |x, y| y == 8 && (5..105).contains(&x));
        let line = img.clone();
        for y in 5..8 {
            img.set(55, y, true);
        }
        assert_eq!(prune(&img, &PruneParams { max_spur_length: 0 }), img);
        assert_eq!(prune(&img, &PruneParams { max_spur_length: 5 }), line);
        // spur longer than the limit stays
        assert_eq!(prune(&img, &PruneParams { max_spur_length: 2 }), img);

        let segment = BinaryImage::from_fn(10, 3, |x, y| y == 1 && (3..7).contains(&x));
        assert_eq!(
            prune(
                &segment,
                &PruneParams {
                    max_spur_length: 10
                }
            ),
            segment
        );
    }

    #[test]
    fn prune_y_junction_keeps_long_arms() {
        // two long diagonal arms meeting a short vertical stub at (20, 20)
        let mut img = BinaryImage::zeros(41, 41);
        for k in 0..15 {
            img.set(20 - 1 - k, 20 + 1 + k, true);
            img.set(20 + 1 + k, 20 + 1 + k, true);
        }
        img.set(20, 20, true);
        for k in 1..=3 {
            img.set(20, 20 - k, true);
        }
        let out = prune(&img, &PruneParams { max_spur_length: 4 });
        assert!(!out.get(20, 17) && !out.get(20, 19));
        assert!(out.get(20, 20));
        assert_eq!(out.count_ones(), 31);
        assert_eq!(count_components(&out), 1);
    }

    #[test]
    fn largest_component_cases() {
        let mut img = BinaryImage::from_fn(20, 5, |x, y| y == 1 && x < 10);
        for x in 14..17 {
            img.set(x, 3, true);
        }
        let big = largest_component(&img);
        assert_eq!(big.count_ones(), 10);
        assert!(!big.get(15, 3));

        let single = BinaryImage::from_fn(8, 8, |x, y| x == y);
        assert_eq!(largest_component(&single), single);
        assert!(largest_component(&BinaryImage::zeros(4, 4)).is_empty());

        // equal sizes: first in row-major order wins
        let tie = from_points(9, 3, &[(6, 0), (7, 0), (1, 2), (2, 2)]);
        assert_eq!(
            largest_component(&tie),
            from_points(9, 3, &[(6, 0), (7, 0)])
        );
    }
}
