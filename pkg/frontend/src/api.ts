/**
 * Thin fetch wrapper for the risk service. Errors come back in one
 * envelope ({"error": {"code", "message"}}) which we surface as ApiError
 * so views can show the code in a banner.
 */

import type {
  Assessment,
  FlowPayload,
  PyramidPayload,
  WorkspacePayload,
} from './types'

export class ApiError extends Error {
  readonly code: string
  readonly status: number

  constructor(status: number, code: string, message: string) {
    super(message)
    this.name = 'ApiError'
    this.status = status
    this.code = code
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiClient {
  private readonly base: string
  private readonly fetchImpl: FetchLike

  constructor(base = '/api/v1', fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, '')
    // bind to globalThis so the default works in both browser and tests
    this.fetchImpl = fetchImpl ?? ((input, init) => globalThis.fetch(input, init))
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response
    try {
      response = await this.fetchImpl(this.base + path, init)
    } catch (err) {
      throw new ApiError(0, 'NETWORK', String(err))
    }
    if (!response.ok) {
      let code = 'BAD_REQUEST'
      let message = `${response.status} ${response.statusText}`
      try {
        const body = await response.json()
        if (body && body.error) {
          code = body.error.code ?? code
          message = body.error.message ?? message
        }
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, code, message)
    }
    return (await response.json()) as T
  }

  getWorkspace(): Promise<WorkspacePayload> {
    return this.request<WorkspacePayload>('/workspace')
  }

  assess(controls: string[]): Promise<Assessment[]> {
    return this.request<Assessment[]>('/assess', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ controls }),
    })
  }

  getPyramid(): Promise<PyramidPayload> {
    return this.request<PyramidPayload>('/pyramid')
  }

  getFlow(flowId: string, actor: string): Promise<FlowPayload> {
    const q = new URLSearchParams({ actor })
    return this.request<FlowPayload>(
      `/flows/${encodeURIComponent(flowId)}?${q.toString()}`
    )
  }

  async getGraphDot(): Promise<string> {
    let response: Response
    try {
      response = await this.fetchImpl(this.base + '/graph.dot')
    } catch (err) {
      throw new ApiError(0, 'NETWORK', String(err))
    }
    if (!response.ok) {
      throw new ApiError(response.status, 'BAD_REQUEST', response.statusText)
    }
    return response.text()
  }
}
