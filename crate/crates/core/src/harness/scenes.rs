//! Two public-domain photographs shipped with the harness so a grid can run
//! without any input files. Provenance is listed in `assets/README.md`.

use std::path::Path;

use crate::error::Result;
use crate::gray::GrayImage;

use super::imageio::{decode_gray, normalize};

/// Side length of the bundled PNGs.
pub const SCENE_SIDE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scene {
    /// A photographer with a tripod-mounted camera.
    Cameraman,
    /// Head-and-shoulders portrait in front of a flag.
    Astronaut,
}

impl Scene {
    pub const ALL: [Scene; 2] = [Scene::Cameraman, Scene::Astronaut];

    pub fn id(self) -> &'static str {
        match self {
            Scene::Cameraman => "cameraman",
            Scene::Astronaut => "astronaut",
        }
    }

    pub fn from_id(id: &str) -> Option<Scene> {
        Scene::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn png_bytes(self) -> &'static [u8] {
        match self {
            Scene::Cameraman => include_bytes!("../../assets/cameraman.png"),
            Scene::Astronaut => include_bytes!("../../assets/astronaut.png"),
        }
    }

    /// Decodes the bundled PNG and normalizes it like any other input.
    pub fn load(self, side: usize) -> Result<GrayImage> {
        let label = format!("<bundled {}.png>", self.id());
        normalize(&decode_gray(self.png_bytes(), Path::new(&label))?, side)
    }
}
