/**
 * Shapes of the service API payloads the dashboard consumes.
 * Numbers always arrive as display strings plus an exact rational;
 * the UI renders the display string and never recomputes anything.
 */

export interface RationalValue {
  display: string
  exact: { num: number; den: number }
}

export type FactorMap = Record<string, number>

export interface Assessment {
  threat_id: string
  enabled_controls: string[]
  residual_likelihood: FactorMap
  residual_impact: FactorMap
  likelihood_score: RationalValue
  impact_score: RationalValue
  severity_score: RationalValue
  severity_label: string
}

export interface TechniqueRef {
  framework: string
  technique_id: string
  name: string
}

export interface ComponentInfo {
  id: string
  name: string
  kind: string
  exposure: string
}

export interface DataFlowInfo {
  id: string
  from: string
  to: string
  data_kind: string
  loopback: boolean
}

export interface BoundaryInfo {
  id: string
  name: string
  members: string[]
}

export interface FlowSummary {
  id: string
  step_count: number
  actors: string[]
}

export interface ThreatInfo {
  id: string
  name: string
  targets: string[]
  techniques: TechniqueRef[]
  weaknesses: { cwe_id: string; title: string; note: string | null }[]
  flows: FlowSummary[]
}

export interface ControlInfo {
  id: string
  name: string
  description: string
  layers: string[]
  adjustments: { factor: string; delta: number }[]
}

export interface WorkspacePayload {
  title: string
  schema_version: string
  model: {
    id: string
    name: string
    components: ComponentInfo[]
    data_flows: DataFlowInfo[]
    trust_boundaries: BoundaryInfo[]
    crossing_flows: string[]
  }
  threats: ThreatInfo[]
  controls: ControlInfo[]
}

export interface PriorityRow {
  control_id: string
  control_name: string
  top_layer: string
  top_layer_rank: number
  severity_reduction: RationalValue
}

export interface CoverageRow {
  layer: string
  rank: number
  controls: { id: string; name: string }[]
}

export interface PyramidPayload {
  priorities: PriorityRow[]
  coverage: CoverageRow[]
}

export interface FlowStepPayload {
  index: number
  stage: string
  technique: TechniqueRef | null
  target: string | null
  skipped: boolean
}

export interface FlowPayload {
  flow_id: string
  threat_id: string
  actor: string
  entry_index: number
  skipped_count: number
  steps: FlowStepPayload[]
}

export type Actor = 'external' | 'insider' | 'unwitting_insider'

export const ACTORS: Actor[] = ['external', 'insider', 'unwitting_insider']
