/**
 * Wires API data to the views and keeps UiState in the URL.
 *
 * Rendering is re-fetch-on-action only: there is no polling, and at most
 * one /assess request is in flight at a time. Rapid toggles coalesce to
 * the newest control set, so the final render always reflects the last
 * click even if intermediate requests were skipped.
 */

import { ApiClient, ApiError } from './api'
import type {
  Assessment,
  FlowPayload,
  PyramidPayload,
  WorkspacePayload,
} from './types'
import {
  defaultState,
  readStateFromUrl,
  writeStateToUrl,
  type UiState,
} from './state'
import {
  renderControlList,
  renderErrorBanner,
  renderFlowControls,
  renderFlowTimeline,
  renderGraph,
  renderPyramid,
  renderThreatCards,
} from './views'

export interface AppHandle {
  /** Resolves once no request is in flight; for tests and scripting. */
  whenIdle(): Promise<void>
  getState(): UiState
}

class PendingTracker {
  private readonly pending = new Set<Promise<unknown>>()

  track<T>(promise: Promise<T>): Promise<T> {
    this.pending.add(promise)
    const drop = () => this.pending.delete(promise)
    promise.then(drop, drop)
    return promise
  }

  async idle(): Promise<void> {
    while (this.pending.size > 0) {
      await Promise.allSettled([...this.pending])
    }
  }
}

const SKELETON = `
<header>
  <h1 id="workspace-title"></h1>
  <div id="error-banner" class="error-banner" hidden></div>
</header>
<main>
  <section id="threats-section">
    <h2>Threats</h2>
    <div id="threat-cards"></div>
  </section>
  <aside id="controls-section">
    <h2>Controls</h2>
    <div class="bulk-buttons">
      <button type="button" id="enable-all">All on</button>
      <button type="button" id="disable-all">All off</button>
    </div>
    <div id="control-list"></div>
  </aside>
  <section id="pyramid-section">
    <h2>Defense pyramid</h2>
    <div id="pyramid-view"></div>
  </section>
  <section id="flow-section">
    <h2>Attack flow</h2>
    <div id="flow-controls"></div>
    <div id="flow-timeline"></div>
  </section>
  <section id="graph-section">
    <h2>Attack surface (DOT)</h2>
    <div id="graph-view"></div>
  </section>
</main>`

function pick(root: HTMLElement, selector: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(selector)
  if (!el) throw new Error(`dashboard skeleton is missing ${selector}`)
  return el
}

export async function initApp(
  root: HTMLElement,
  client: ApiClient = new ApiClient()
): Promise<AppHandle> {
  root.innerHTML = SKELETON

  const banner = pick(root, '#error-banner')
  const threatCards = pick(root, '#threat-cards')
  const controlList = pick(root, '#control-list')
  const pyramidView = pick(root, '#pyramid-view')
  const flowControls = pick(root, '#flow-controls')
  const flowTimeline = pick(root, '#flow-timeline')
  const graphView = pick(root, '#graph-view')

  const tracker = new PendingTracker()

  let workspace: WorkspacePayload
  let pyramid: PyramidPayload
  let dotText: string
  let inherentList: Assessment[]
  try {
    ;[workspace, pyramid, dotText, inherentList] = await tracker.track(
      Promise.all([
        client.getWorkspace(),
        client.getPyramid(),
        client.getGraphDot(),
        client.assess([]),
      ])
    )
  } catch (err) {
    renderErrorBanner(banner, err instanceof ApiError ? err : null)
    if (!(err instanceof ApiError)) throw err
    return { whenIdle: () => tracker.idle(), getState: () => defaultState([]) }
  }

  const allControlIds = workspace.controls.map((control) => control.id)
  const allFlows = workspace.threats.flatMap((threat) => threat.flows)
  const state = readStateFromUrl(allControlIds)
  if (state.flowId === null && allFlows.length > 0) {
    state.flowId = allFlows[0].id
  }

  const inherent = new Map(inherentList.map((a) => [a.threat_id, a]))
  let current = new Map(inherent)

  pick(root, '#workspace-title').textContent = workspace.title
  document.title = `${workspace.title} - what-if`
  renderGraph(graphView, dotText)

  function renderAll(): void {
    renderThreatCards(threatCards, workspace.threats, inherent, current)
    renderControlList(controlList, workspace.controls, state.enabled)
    renderPyramid(pyramidView, pyramid, state.enabled)
    renderFlowControls(flowControls, workspace.threats, state.flowId, state.actor)
  }

  // --- assess, with coalescing -------------------------------------
  let assessInFlight = false
  let queuedControls: string[] | null = null

  function submitAssess(ids: string[]): void {
    if (assessInFlight) {
      queuedControls = ids
      return
    }
    assessInFlight = true
    tracker.track(
      client
        .assess(ids)
        .then((assessments) => {
          current = new Map(assessments.map((a) => [a.threat_id, a]))
          renderErrorBanner(banner, null)
          renderThreatCards(threatCards, workspace.threats, inherent, current)
        })
        .catch((err) => {
          if (err instanceof ApiError) renderErrorBanner(banner, err)
          else throw err
        })
        .finally(() => {
          assessInFlight = false
          if (queuedControls !== null) {
            const next = queuedControls
            queuedControls = null
            submitAssess(next)
          }
        })
    )
  }

  function enabledInOrder(): string[] {
    return allControlIds.filter((id) => state.enabled.has(id))
  }

  function onStateChanged(): void {
    writeStateToUrl(state, allControlIds)
    renderControlList(controlList, workspace.controls, state.enabled)
    renderPyramid(pyramidView, pyramid, state.enabled)
    submitAssess(enabledInOrder())
  }

  function toggleControl(controlId: string): void {
    if (state.enabled.has(controlId)) state.enabled.delete(controlId)
    else state.enabled.add(controlId)
    onStateChanged()
  }

  // --- flows --------------------------------------------------------
  function refreshFlow(): void {
    if (!state.flowId) {
      renderFlowTimeline(flowTimeline, null)
      return
    }
    const flowId = state.flowId
    const actor = state.actor
    tracker.track(
      client
        .getFlow(flowId, actor)
        .then((payload: FlowPayload) => {
          // drop responses that no longer match the selection
          if (state.flowId === flowId && state.actor === actor) {
            renderFlowTimeline(flowTimeline, payload)
          }
        })
        .catch((err) => {
          if (err instanceof ApiError) renderFlowTimeline(flowTimeline, null, err)
          else throw err
        })
    )
  }

  // --- events --------------------------------------------------------
  controlList.addEventListener('change', (event) => {
    const target = event.target as HTMLElement
    const controlId = target.getAttribute('data-control-id')
    if (controlId) toggleControl(controlId)
  })

  pyramidView.addEventListener('click', (event) => {
    const chip = (event.target as HTMLElement).closest('[data-control-id]')
    const controlId = chip?.getAttribute('data-control-id')
    if (controlId) toggleControl(controlId)
  })

  pick(root, '#enable-all').addEventListener('click', () => {
    state.enabled = new Set(allControlIds)
    onStateChanged()
  })

  pick(root, '#disable-all').addEventListener('click', () => {
    state.enabled = new Set()
    onStateChanged()
  })

  flowControls.addEventListener('change', (event) => {
    const target = event.target as HTMLSelectElement
    if (target.id === 'flow-select') {
      state.flowId = target.value
    } else if (target.id === 'actor-select') {
      state.actor = target.value as UiState['actor']
    } else {
      return
    }
    writeStateToUrl(state, allControlIds)
    renderFlowControls(flowControls, workspace.threats, state.flowId, state.actor)
    refreshFlow()
  })

  renderAll()
  refreshFlow()
  if (enabledInOrder().length > 0) {
    submitAssess(enabledInOrder())
  }

  return {
    whenIdle: () => tracker.idle(),
    getState: () => state,
  }
}
