//! Full frame composition with all per-pixel plans built once per raster size.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{build_grid, GridMapping, GridSpec};
use crate::pipeline::aux::{AuxLayout, AuxPlan, AuxWindowState};
use crate::pipeline::dvb::DvbPlan;
use crate::pipeline::mesh::{apply_mesh, MeshMask};
use crate::pipeline::projection::ProjectionPlan;
use crate::pipeline::{check_dims, PipelineConfig, PipelineError};
use crate::raster::Frame;

/// Intermediate outputs that can be rendered on their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Re-projected patches.
    ErpStar,
    /// Re-projected patches under the mesh screen.
    Mesh,
    /// Re-projection, vertical blur and mesh.
    Dvb,
    /// As `Dvb` with every auxiliary window drawn clear.
    WinDbMinus,
    /// As `Dvb` with auxiliary windows blended by their blur state.
    WinDb,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::ErpStar,
        Stage::Mesh,
        Stage::Dvb,
        Stage::WinDbMinus,
        Stage::WinDb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::ErpStar => "erp-star",
            Stage::Mesh => "mesh",
            Stage::Dvb => "dvb",
            Stage::WinDbMinus => "windb-minus",
            Stage::WinDb => "windb",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage '{s}'"))
    }
}

/// One composed display frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WinDbFrame {
    pub raster: Frame,
    pub states: Vec<AuxWindowState>,
    pub frame_index: u64,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone)]
pub struct WinDbRenderer {
    cfg: PipelineConfig,
    grid: GridMapping,
    projection: ProjectionPlan,
    dvb: DvbPlan,
    mesh: MeshMask,
    layout: AuxLayout,
    aux: AuxPlan,
}

impl WinDbRenderer {
    pub fn new(width: u32, height: u32, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let grid = build_grid(GridSpec::new(width, height, cfg.grid_interval_deg)?)?;
        let layout = AuxLayout::standard(width, height, cfg)?;
        Self::with_parts(grid, layout, cfg)
    }

    pub fn with_parts(
        grid: GridMapping,
        layout: AuxLayout,
        cfg: &PipelineConfig,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let spec = grid.spec();
        Ok(Self {
            projection: ProjectionPlan::new(&grid)?,
            dvb: DvbPlan::new(&grid, cfg)?,
            mesh: MeshMask::new(&grid, cfg.mesh_thickness_px),
            aux: AuxPlan::new(layout.windows(), spec.width_px, spec.height_px, cfg)?,
            cfg: cfg.clone(),
            grid,
            layout,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &GridMapping {
        &self.grid
    }

    pub fn layout(&self) -> &AuxLayout {
        &self.layout
    }

    pub fn mesh(&self) -> &MeshMask {
        &self.mesh
    }

    pub fn dvb(&self) -> &DvbPlan {
        &self.dvb
    }

    pub fn aux(&self) -> &AuxPlan {
        &self.aux
    }

    pub fn width(&self) -> u32 {
        self.grid.spec().width_px
    }

    pub fn height(&self) -> u32 {
        self.grid.spec().height_px
    }

    pub fn erp_star(&self, erp: &Frame) -> Result<Frame, PipelineError> {
        self.projection.apply(erp)
    }

    /// Re-projection, vertical blur, then the mesh screen.
    pub fn erp_star_star_b(&self, erp: &Frame) -> Result<Frame, PipelineError> {
        let star = self.projection.apply(erp)?;
        let blurred = self.dvb.apply(&star)?;
        apply_mesh(&blurred, &self.mesh)
    }

    pub fn render_stage(
        &self,
        erp: &Frame,
        stage: Stage,
        states: &[AuxWindowState],
    ) -> Result<Frame, PipelineError> {
        check_dims(erp, self.width(), self.height())?;
        match stage {
            Stage::ErpStar => self.erp_star(erp),
            Stage::Mesh => apply_mesh(&self.erp_star(erp)?, &self.mesh),
            Stage::Dvb => self.erp_star_star_b(erp),
            Stage::WinDbMinus => {
                let clear: Vec<AuxWindowState> = self
                    .layout
                    .windows()
                    .iter()
                    .copied()
                    .map(AuxWindowState::held_clear)
                    .collect();
                self.aux.compose(&self.erp_star_star_b(erp)?, &clear, erp)
            }
            Stage::WinDb => self.aux.compose(&self.erp_star_star_b(erp)?, states, erp),
        }
    }

    pub fn render(
        &self,
        erp: &Frame,
        states: &[AuxWindowState],
        frame_index: u64,
        timestamp_ms: u64,
    ) -> Result<WinDbFrame, PipelineError> {
        Ok(WinDbFrame {
            raster: self.render_stage(erp, Stage::WinDb, states)?,
            states: states.to_vec(),
            frame_index,
            timestamp_ms,
        })
    }
}

/// One-shot composition. Builds every plan for this call; prefer
/// [`WinDbRenderer`] for sequences.
pub fn render_windb_frame(
    erp: &Frame,
    gm: &GridMapping,
    states: &[AuxWindowState],
    cfg: &PipelineConfig,
    frame_index: u64,
    timestamp_ms: u64,
) -> Result<WinDbFrame, PipelineError> {
    let spec = gm.spec();
    check_dims(erp, spec.width_px, spec.height_px)?;
    let layout = AuxLayout::new(states.iter().map(|s| *s.window()).collect())?;
    WinDbRenderer::with_parts(gm.clone(), layout, cfg)?.render(
        erp,
        states,
        frame_index,
        timestamp_ms,
    )
}
