/**
 * DOM rendering. Every function replaces the innerHTML of its container;
 * the app re-renders whole sections on state change rather than patching.
 * All number strings come straight from API payloads.
 */

import type {
  Assessment,
  ControlInfo,
  FlowPayload,
  PyramidPayload,
  ThreatInfo,
} from './types'
import { ApiError } from './api'

export const escapeHtml = (value: unknown): string =>
  String(value ?? '')
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')

const badge = (label: string): string =>
  `<span class="badge badge-${escapeHtml(label.toLowerCase())}">${escapeHtml(
    label
  )}</span>`

export function renderThreatCards(
  container: HTMLElement,
  threats: ThreatInfo[],
  inherent: Map<string, Assessment>,
  current: Map<string, Assessment>
): void {
  if (!threats.length) {
    container.innerHTML = '<p class="empty">No threats in this workspace.</p>'
    return
  }
  container.innerHTML = threats
    .map((threat) => {
      const base = inherent.get(threat.id)
      const now = current.get(threat.id)
      if (!base || !now) return ''
      const techniques = threat.techniques
        .map((t) => `<code>${escapeHtml(t.technique_id)}</code>`)
        .join(' ')
      return `
<article class="threat-card" data-threat-id="${escapeHtml(threat.id)}">
  <h3>${escapeHtml(threat.name)}</h3>
  <div class="techniques">${techniques}</div>
  <table class="score-table">
    <tr>
      <th></th><th>Likelihood</th><th>Impact</th><th>Severity</th><th></th>
    </tr>
    <tr class="inherent-row">
      <td>Inherent</td>
      <td>${escapeHtml(base.likelihood_score.display)}</td>
      <td>${escapeHtml(base.impact_score.display)}</td>
      <td class="inherent-severity">${escapeHtml(base.severity_score.display)}</td>
      <td>${badge(base.severity_label)}</td>
    </tr>
    <tr class="current-row">
      <td>Current</td>
      <td>${escapeHtml(now.likelihood_score.display)}</td>
      <td>${escapeHtml(now.impact_score.display)}</td>
      <td class="current-severity">${escapeHtml(now.severity_score.display)}</td>
      <td>${badge(now.severity_label)}</td>
    </tr>
  </table>
</article>`
    })
    .join('')
}

export function renderControlList(
  container: HTMLElement,
  controls: ControlInfo[],
  enabled: Set<string>
): void {
  if (!controls.length) {
    container.innerHTML = '<p class="empty">No controls in the catalog.</p>'
    return
  }
  container.innerHTML = controls
    .map((control) => {
      const checked = enabled.has(control.id) ? 'checked' : ''
      return `
<label class="control-row" title="${escapeHtml(control.description)}">
  <input type="checkbox" data-control-id="${escapeHtml(control.id)}" ${checked} />
  <span class="control-name">${escapeHtml(control.name)}</span>
</label>`
    })
    .join('')
}

export function renderPyramid(
  container: HTMLElement,
  pyramid: PyramidPayload,
  enabled: Set<string>
): void {
  const tiers = pyramid.coverage
    .map((row) => {
      const chips = row.controls
        .map((control) => {
          const cls = enabled.has(control.id) ? 'chip enabled' : 'chip'
          return `<button type="button" class="${cls}" data-control-id="${escapeHtml(
            control.id
          )}">${escapeHtml(control.name)}</button>`
        })
        .join('')
      return `
<div class="tier tier-${row.rank}">
  <div class="tier-label">${escapeHtml(row.layer)} <small>(${row.rank})</small></div>
  <div class="tier-chips">${chips || '<span class="empty">(none)</span>'}</div>
</div>`
    })
    .join('')

  const ranking = pyramid.priorities
    .map(
      (p) =>
        `<li><strong>${escapeHtml(p.control_name)}</strong> (${escapeHtml(
          p.top_layer
        )}), reduces ${escapeHtml(p.severity_reduction.display)}</li>`
    )
    .join('')

  container.innerHTML = `
<div class="pyramid">${tiers}</div>
<details class="ranking">
  <summary>Build order</summary>
  <ol>${ranking}</ol>
</details>`
}

export function renderFlowControls(
  container: HTMLElement,
  threats: ThreatInfo[],
  selectedFlowId: string | null,
  actor: string
): void {
  const options = threats
    .flatMap((threat) =>
      threat.flows.map((flow) => {
        const selected = flow.id === selectedFlowId ? 'selected' : ''
        return `<option value="${escapeHtml(flow.id)}" ${selected}>${escapeHtml(
          threat.name
        )}: ${escapeHtml(flow.id)} (${flow.step_count} steps)</option>`
      })
    )
    .join('')
  const actorOptions = ['external', 'insider', 'unwitting_insider']
    .map(
      (name) =>
        `<option value="${name}" ${name === actor ? 'selected' : ''}>${name.replace(
          /_/g,
          ' '
        )}</option>`
    )
    .join('')
  container.innerHTML = `
<label>Attack flow
  <select id="flow-select">${options}</select>
</label>
<label>Actor
  <select id="actor-select">${actorOptions}</select>
</label>`
}

export function renderFlowTimeline(
  container: HTMLElement,
  payload: FlowPayload | null,
  error: ApiError | null = null
): void {
  if (error) {
    container.innerHTML = `<p class="flow-error">${escapeHtml(error.code)}: ${escapeHtml(
      error.message
    )}</p>`
    return
  }
  if (!payload) {
    container.innerHTML = '<p class="empty">No attack flows to show.</p>'
    return
  }
  const steps = payload.steps
    .map((step) => {
      const cls = step.skipped ? 'step skipped' : 'step'
      const technique = step.technique
        ? ` <code>${escapeHtml(step.technique.technique_id)}</code>`
        : ''
      const target = step.target
        ? ` <small>→ ${escapeHtml(step.target)}</small>`
        : ''
      return `<li class="${cls}" data-step-index="${step.index}">
  <span class="step-no">${step.index}</span> ${escapeHtml(step.stage)}${technique}${target}
</li>`
    })
    .join('')
  container.innerHTML = `
<p class="flow-meta">
  <code>${escapeHtml(payload.flow_id)}</code> as <strong>${escapeHtml(
    payload.actor
  )}</strong>: enters at step ${payload.entry_index},
  <span class="skip-count">${payload.skipped_count}</span> skipped
</p>
<ol class="timeline">${steps}</ol>`
}

export function renderGraph(container: HTMLElement, dotText: string): void {
  // No client-side DOT renderer; the raw text is still copyable into
  // Graphviz and keeps this bundle dependency-free.
  container.innerHTML = `<pre class="dot-text">${escapeHtml(dotText)}</pre>`
}

export function renderErrorBanner(
  container: HTMLElement,
  error: ApiError | null
): void {
  if (!error) {
    container.innerHTML = ''
    container.hidden = true
    return
  }
  container.hidden = false
  container.innerHTML = `<strong>${escapeHtml(error.code)}</strong> ${escapeHtml(
    error.message
  )}`
}
